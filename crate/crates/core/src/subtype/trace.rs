use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::syntax::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Bot,
    Swap,
    Split,
    Plus,
    With,
    Tensor,
    Lolli,
    One,
    Exists,
    Forall,
    Var,
    Def,
    Refl,
    Expd,
    Unfold,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Bot => "bot",
            Rule::Swap => "swap",
            Rule::Split => "split",
            Rule::Plus => "plus",
            Rule::With => "with",
            Rule::Tensor => "tensor",
            Rule::Lolli => "lolli",
            Rule::One => "one",
            Rule::Exists => "exists",
            Rule::Forall => "forall",
            Rule::Var => "var",
            Rule::Def => "def",
            Rule::Refl => "refl",
            Rule::Expd => "expd",
            Rule::Unfold => "unfold",
        })
    }
}

/// A successful derivation tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub lhs: Type,
    pub rhs: Type,
    pub note: Option<String>,
    /// Index of the seed closure used by a `def` step.
    pub seed: Option<usize>,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: Rule, lhs: &Type, rhs: &Type) -> Self {
        Derivation { rule, lhs: lhs.clone(), rhs: rhs.clone(), note: None, seed: None, children: Vec::new() }
    }

    pub fn node(rule: Rule, lhs: &Type, rhs: &Type, children: Vec<Derivation>) -> Self {
        Derivation { children, ..Derivation::leaf(rule, lhs, rhs) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    /// Seed indices used anywhere in the tree.
    pub fn seeds(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_seeds(&mut out);
        out
    }

    fn collect_seeds(&self, out: &mut BTreeSet<usize>) {
        if let Some(s) = self.seed {
            out.insert(s);
        }
        for c in &self.children {
            c.collect_seeds(out);
        }
    }

    /// Every rule application in pre-order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = vec![self.rule];
        for c in &self.children {
            out.extend(c.rules());
        }
        out
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.write_lines(0, &mut out);
        out
    }

    fn write_lines(&self, indent: usize, out: &mut Vec<String>) {
        let mut line = format!("{}{} {} <= {}", "  ".repeat(indent), self.rule, self.lhs, self.rhs);
        if let Some(n) = &self.note {
            line.push_str(&format!("  [{n}]"));
        }
        out.push(line);
        for c in &self.children {
            c.write_lines(indent + 1, out);
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Why a goal failed, with the steps leading to it from the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refutation {
    pub path: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    Depth,
    SideCondition,
    Goals,
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetKind::Depth => "depth",
            BudgetKind::SideCondition => "side-condition",
            BudgetKind::Goals => "goals",
        })
    }
}

/// A budget ran out before the search finished.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exhaustion {
    pub budget: BudgetKind,
    pub frontier: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Subtype(Derivation),
    NotSubtype(Refutation),
    Unknown(Exhaustion),
}

impl Verdict {
    pub fn is_subtype(&self) -> bool {
        matches!(self, Verdict::Subtype(_))
    }

    pub fn is_not_subtype(&self) -> bool {
        matches!(self, Verdict::NotSubtype(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Subtype(_) => "subtype",
            Verdict::NotSubtype(_) => "not_subtype",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

/// Search statistics for one check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub goals: usize,
    pub max_depth: usize,
    /// Continuation goals produced by a structural rule with a non-name side.
    pub alternation_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub verdict: Verdict,
    pub stats: Stats,
}

impl Report {
    pub fn seeds_used(&self) -> usize {
        match &self.verdict {
            Verdict::Subtype(d) => d.seeds().len(),
            _ => 0,
        }
    }
}
