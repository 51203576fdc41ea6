use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bounded_sim, OracleOutcome};
use crate::bpa::{bounded_inclusion, gen_pair, show_word, translate, BpaError, BpaSystem, Inclusion};
use crate::rename::{rename_signature, wrap_type};
use crate::subtype::{Budget, Checker, Fault, Goal};

/// Checker budget for generated pairs. Pairs the algorithm cannot settle
/// quickly end `Unknown`, which the campaign never counts against it.
pub const CAMPAIGN_BUDGET: Budget = Budget { depth: crate::subtype::DEFAULT_DEPTH, side_conditions: 8, goals: 10_000 };

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub n: usize,
    pub seed: u64,
    /// Word length bound for the inclusion oracle.
    pub inclusion_k: usize,
    /// Depth bound for the simulation oracle.
    pub sim_k: usize,
    pub node_cap: usize,
    pub max_vars: usize,
    pub max_branches: usize,
    pub max_seq_len: usize,
    pub budget: Budget,
    pub fault: Option<Fault>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            n: 200,
            seed: 7,
            inclusion_k: 10,
            sim_k: super::DEFAULT_K,
            node_cap: super::DEFAULT_NODE_CAP,
            max_vars: 5,
            max_branches: 3,
            max_seq_len: 3,
            budget: CAMPAIGN_BUDGET,
            fault: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub seed: u64,
    pub system: BpaSystem,
    pub left: String,
    pub right: String,
    pub verdict: &'static str,
    pub inclusion: Inclusion,
    pub sim: OracleOutcome,
}

impl FuzzCase {
    /// The algorithm accepted a pair one of the oracles refutes.
    pub fn is_violation(&self) -> bool {
        self.verdict == "subtype"
            && (!self.inclusion.is_included() || matches!(&self.sim, OracleOutcome::Sim(s) if s.is_refuted()))
    }

    pub fn describe(&self) -> String {
        let incl = match &self.inclusion {
            Inclusion::Included => "included".to_string(),
            Inclusion::Witness(w) => format!("witness \"{}\"", show_word(w)),
        };
        let sim = match &self.sim {
            OracleOutcome::Sim(s) => s.to_string(),
            OracleOutcome::Unsupported(e) => e.clone(),
        };
        format!("seed {}: {} <= {}: {}; {incl}; {sim}", self.seed, self.left, self.right, self.verdict)
    }
}

#[derive(Clone, Debug, Default)]
pub struct FuzzReport {
    pub cases: Vec<FuzzCase>,
}

impl FuzzReport {
    pub fn violations(&self) -> Vec<&FuzzCase> {
        self.cases.iter().filter(|c| c.is_violation()).collect()
    }

    pub fn count(&self, verdict: &str) -> usize {
        self.cases.iter().filter(|c| c.verdict == verdict).count()
    }
}

/// Generates `n` system pairs, translates them, and compares the algorithm
/// with both oracles. Case `i` uses seed `seed + i`.
pub fn fuzz_bpa(cfg: &FuzzConfig) -> Result<FuzzReport, BpaError> {
    let cases = (0..cfg.n as u64)
        .into_par_iter()
        .map(|i| run_case(cfg, cfg.seed.wrapping_add(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FuzzReport { cases })
}

fn run_case(cfg: &FuzzConfig, seed: u64) -> Result<FuzzCase, BpaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.gen_range(1..=cfg.max_vars.max(1));
    let branches = rng.gen_range(1..=cfg.max_branches.max(1));
    let seq = rng.gen_range(1..=cfg.max_seq_len.max(1));
    let (system, left, right) = gen_pair(seed, vars, branches, seq);
    let tr = translate(&system)?;
    let (lt, rt) = (tr.var_type(&left), tr.var_type(&right));

    let renamed = rename_signature(&tr.sig).expect("translation only uses its own names");
    let (lw, sig1) = wrap_type(&renamed, &lt).expect("names are defined");
    let (rw, sig2) = wrap_type(&sig1, &rt).expect("names are defined");
    let report = Checker::new(&sig2, &[]).with_budget(cfg.budget).with_fault(cfg.fault).check(&Goal::new(lw, rw));

    let inclusion = bounded_inclusion(&tr.system, &left, &right, cfg.inclusion_k)?;
    let sim = match bounded_sim(&tr.sig, &lt, &rt, cfg.sim_k, cfg.node_cap) {
        Ok(s) => OracleOutcome::Sim(s),
        Err(e) => OracleOutcome::Unsupported(e.to_string()),
    };
    Ok(FuzzCase { seed, system, left, right, verdict: report.verdict.label(), inclusion, sim })
}
