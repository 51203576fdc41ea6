use thiserror::Error;

use super::{Budget, Checker, Closure, Goal, Report, Verdict};
use crate::rename::RenamedEq;
use crate::variance::Signature;

/// Closures declared by `eqtype`, both directions for `=`.
pub fn seeds_of(eqs: &[RenamedEq]) -> Vec<Closure> {
    let mut out = Vec::new();
    for e in eqs {
        let vars = e.vars.iter().cloned().collect();
        out.push(Closure { vars, lhs: e.lhs.clone(), rhs: e.rhs.clone() });
        if e.bidirectional {
            let vars = e.vars.iter().cloned().collect();
            out.push(Closure { vars, lhs: e.rhs.clone(), rhs: e.lhs.clone() });
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: eqtype {goal} does not hold ({reason})")]
pub struct InvalidSeed {
    pub index: usize,
    pub line: usize,
    pub goal: String,
    pub reason: String,
}

/// Checks each declared closure under all of them, one report per direction.
/// Each check must start by unfolding, so no closure can justify itself directly.
pub fn check_eqtypes(sig: &Signature, eqs: &[RenamedEq], budget: Budget) -> Vec<Vec<Report>> {
    let seeds = seeds_of(eqs);
    let checker = Checker::new(sig, &seeds).with_budget(budget);
    let mut out = Vec::new();
    let mut k = 0;
    for e in eqs {
        let n = if e.bidirectional { 2 } else { 1 };
        let reports = seeds[k..k + n]
            .iter()
            .map(|c| {
                let goal = Goal { vars: c.vars.clone(), ..Goal::new(c.lhs.clone(), c.rhs.clone()) };
                checker.check_guarded(&goal)
            })
            .collect();
        out.push(reports);
        k += n;
    }
    out
}

/// The seed closures, if every declaration holds under all of them.
pub fn validate_eqtypes(sig: &Signature, eqs: &[RenamedEq], budget: Budget) -> Result<Vec<Closure>, Vec<InvalidSeed>> {
    let seeds = seeds_of(eqs);
    let mut errors = Vec::new();
    let mut k = 0;
    for (index, (e, reports)) in eqs.iter().zip(check_eqtypes(sig, eqs, budget)).enumerate() {
        for report in reports {
            let c = &seeds[k];
            k += 1;
            let reason = match &report.verdict {
                Verdict::Subtype(_) => continue,
                Verdict::NotSubtype(r) => r.reason.clone(),
                Verdict::Unknown(x) => format!("{} budget exhausted at {}", x.budget, x.frontier),
            };
            errors.push(InvalidSeed { index, line: e.line, goal: c.to_string(), reason });
        }
    }
    if errors.is_empty() {
        Ok(seeds)
    } else {
        Err(errors)
    }
}
