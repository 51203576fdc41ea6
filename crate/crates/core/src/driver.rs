//! End-to-end pipeline for a source file and its reports.
//!
//! parse, structural validity, internal renaming, variance inference,
//! signature validity, seed validation, then every query at `Co`.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rename::{internal_rename, RenameError, RenamedProgram};
use crate::subtype::{check_eqtypes, Budget, Checker, Closure, Fault, Goal, Report, Verdict};
use crate::syntax::{parse_program, Item, Program, SyntaxError, Type};
use crate::variance::{
    check_signature_valid, check_type_valid, infer_variances, Signature, ValidityError, Variance, VarianceContext,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid program:\n{}", list(.0))]
    Validity(Vec<ValidityError>),
    #[error("{0}")]
    Rename(#[from] RenameError),
    #[error("invalid eqtype declaration(s):\n{}", list(.0))]
    InvalidSeeds(Vec<String>),
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("  {}", x.to_string())).collect::<Vec<_>>().join("\n")
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub budget: Budget,
    pub trace: bool,
    pub fault: Option<Fault>,
}

/// A program that passed every check up to seed validation.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub program: Program,
    /// User signature with inferred variances, before renaming.
    pub source_sig: Signature,
    pub renamed: RenamedProgram,
    pub eq_reports: Vec<Vec<Report>>,
}

impl Prepared {
    pub fn sig(&self) -> &Signature {
        &self.renamed.sig
    }

    pub fn seeds_valid(&self) -> bool {
        self.eq_reports.iter().flatten().all(|r| r.verdict.is_subtype())
    }

    pub fn seeds(&self) -> Vec<Closure> {
        crate::subtype::seeds_of(&self.renamed.eqtypes)
    }
}

/// Runs the pipeline up to and including seed checking.
pub fn prepare(src: &str, budget: Budget) -> Result<Prepared, PipelineError> {
    let program = parse_program(src)?;
    let source_sig = infer_variances(&Signature::from_program(&program));
    let mut errors = check_signature_valid(&source_sig).err().unwrap_or_default();
    errors.extend(check_items(&program, &source_sig));
    if !errors.is_empty() {
        return Err(PipelineError::Validity(errors));
    }
    let renamed = internal_rename(&program)?;
    check_signature_valid(&renamed.sig).map_err(PipelineError::Validity)?;
    let eq_reports = check_eqtypes(&renamed.sig, &renamed.eqtypes, budget);
    Ok(Prepared { program, source_sig, renamed, eq_reports })
}

fn check_items(program: &Program, sig: &Signature) -> Vec<ValidityError> {
    let empty = VarianceContext::default();
    let mut out = Vec::new();
    let mut push = |vars: &[String], t: &Type, what: String| {
        let vars: BTreeSet<String> = vars.iter().cloned().collect();
        if let Err(mut e) = check_type_valid(&vars, &empty, t, Variance::Co, sig) {
            e.path.insert(0, what);
            out.push(e);
        }
    };
    for item in &program.items {
        match item {
            Item::Check(c) => {
                push(&[], &c.lhs, format!("check (line {})", c.line));
                push(&[], &c.rhs, format!("check (line {})", c.line));
            }
            Item::EqType(e) => {
                push(&e.vars, &e.lhs, format!("eqtype (line {})", e.line));
                push(&e.vars, &e.rhs, format!("eqtype (line {})", e.line));
            }
            Item::ProcDecl(d) => {
                for t in &d.types {
                    push(&d.vars, t, format!("decl {} (line {})", d.name, d.line));
                }
            }
            Item::TypeDef(_) | Item::Proc { .. } => {}
        }
    }
    out
}

/// One line of a check report.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Record {
    pub kind: &'static str,
    pub line: usize,
    pub goal: String,
    pub verdict: &'static str,
    pub depth_used: usize,
    pub seeds_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
    #[serde(skip)]
    pub micros: u128,
}

impl Record {
    fn new(kind: &'static str, line: usize, goal: String, report: &Report, trace: bool, micros: u128) -> Self {
        let mut r = Record {
            kind,
            line,
            goal,
            verdict: report.verdict.label(),
            depth_used: report.stats.max_depth,
            seeds_used: report.seeds_used(),
            reason: None,
            path: None,
            budget: None,
            trace: None,
            micros,
        };
        match &report.verdict {
            Verdict::Subtype(d) if trace => r.trace = Some(d.lines()),
            Verdict::Subtype(_) => {}
            Verdict::NotSubtype(x) => {
                r.reason = Some(x.reason.clone());
                r.path = Some(x.path.clone());
            }
            Verdict::Unknown(x) => {
                r.budget = Some(x.budget.to_string());
                r.reason = Some(format!("budget exhausted at {}", x.frontier));
            }
        }
        r
    }

    pub fn text(&self) -> String {
        let mut s = format!("{} {}: {}", self.kind, self.goal, self.verdict.replace('_', " "));
        if let Some(r) = &self.reason {
            s.push_str(&format!(" ({r})"));
        }
        if let Some(t) = &self.trace {
            for l in t {
                s.push_str(&format!("\n    {l}"));
            }
        }
        s
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub subtype: usize,
    pub not_subtype: usize,
    pub unknown: usize,
}

/// The outcome of `check` on one file.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CheckRun {
    pub records: Vec<Record>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SUBTYPE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

impl CheckRun {
    fn failed(e: &PipelineError) -> Self {
        CheckRun { records: Vec::new(), summary: Summary::default(), error: Some(e.to_string()) }
    }

    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_ERROR
        } else if self.summary.not_subtype > 0 {
            EXIT_NOT_SUBTYPE
        } else if self.summary.unknown > 0 {
            EXIT_UNKNOWN
        } else {
            EXIT_OK
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn goal_text(lhs: &Type, rhs: &Type) -> String {
    format!("{lhs} <= {rhs}")
}

/// Checks every query of `src` in input order.
pub fn run_check(src: &str, opts: &Options) -> CheckRun {
    let prepared = match prepare(src, opts.budget) {
        Ok(p) => p,
        Err(e) => return CheckRun::failed(&e),
    };
    let mut records = Vec::new();
    for (e, reports) in prepared.renamed.eqtypes.iter().zip(&prepared.eq_reports) {
        for (i, report) in reports.iter().enumerate() {
            let goal = if i == 0 { goal_text(&e.source.0, &e.source.1) } else { goal_text(&e.source.1, &e.source.0) };
            records.push(Record::new("eqtype", e.line, goal, report, opts.trace, 0));
        }
    }
    if !prepared.seeds_valid() {
        let bad: Vec<String> = records
            .iter()
            .filter(|r| r.verdict != "subtype")
            .map(|r| format!("line {}: {} is {}", r.line, r.goal, r.verdict.replace('_', " ")))
            .collect();
        let e = PipelineError::InvalidSeeds(bad);
        return CheckRun { records, summary: Summary::default(), error: Some(e.to_string()) };
    }
    let seeds = prepared.seeds();
    let checker = Checker::new(prepared.sig(), &seeds).with_budget(opts.budget).with_fault(opts.fault);
    let queries: Vec<Record> = prepared
        .renamed
        .queries
        .par_iter()
        .map(|q| {
            let start = Instant::now();
            let report = checker.check(&Goal::new(q.lhs.clone(), q.rhs.clone()));
            let micros = start.elapsed().as_micros();
            Record::new("check", q.line, goal_text(&q.source.0, &q.source.1), &report, opts.trace, micros)
        })
        .collect();
    let mut summary = Summary::default();
    for r in &queries {
        match r.verdict {
            "subtype" => summary.subtype += 1,
            "not_subtype" => summary.not_subtype += 1,
            _ => summary.unknown += 1,
        }
    }
    records.extend(queries);
    records.sort_by_key(|r| r.line);
    CheckRun { records, summary, error: None }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ParamVariance {
    pub name: String,
    pub variance: Variance,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DefinitionReport {
    pub name: String,
    pub params: Vec<ParamVariance>,
}

impl DefinitionReport {
    pub fn text(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let ps: String = self.params.iter().map(|p| format!("[{} # {}]", p.name, p.variance)).collect();
        format!("{}{ps}", self.name)
    }
}

/// The outcome of `validate` on one file.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ValidateRun {
    pub definitions: Vec<DefinitionReport>,
    pub eqtypes: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ValidateRun {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_ERROR
        } else {
            EXIT_OK
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Validates `src` and reports inferred variances of the user definitions.
pub fn run_validate(src: &str, budget: Budget) -> ValidateRun {
    let prepared = match prepare(src, budget) {
        Ok(p) => p,
        Err(e) => return ValidateRun { definitions: Vec::new(), eqtypes: Vec::new(), error: Some(e.to_string()) },
    };
    let definitions = prepared
        .renamed
        .user_defs
        .iter()
        .map(|n| DefinitionReport {
            name: n.clone(),
            params: prepared.sig().defs[n]
                .params
                .0
                .iter()
                .map(|(p, v)| ParamVariance { name: p.clone(), variance: *v })
                .collect(),
        })
        .collect();
    let mut eqtypes = Vec::new();
    for (e, reports) in prepared.renamed.eqtypes.iter().zip(&prepared.eq_reports) {
        for (i, report) in reports.iter().enumerate() {
            let goal = if i == 0 { goal_text(&e.source.0, &e.source.1) } else { goal_text(&e.source.1, &e.source.0) };
            eqtypes.push(Record::new("eqtype", e.line, goal, report, false, 0));
        }
    }
    let error = if prepared.seeds_valid() {
        None
    } else {
        Some("invalid eqtype declaration(s)".to_string())
    };
    ValidateRun { definitions, eqtypes, error }
}
