use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BpaExpr, BpaSystem};

const LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Label of the branch added to variables that cannot terminate.
pub const EXIT: &str = "exit";

/// A random guarded, deterministic, normed system in head normal form over
/// variables `X0 .. X{n_vars-1}`, rooted at `X0`. Each body has between one
/// and `max_branches` branches, each an action followed by at most
/// `max_seq_len` actions or variables.
pub fn gen_random(seed: u64, n_vars: usize, max_branches: usize, max_seq_len: usize) -> BpaSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<String> = (0..n_vars.max(1)).map(|i| format!("X{i}")).collect();
    let mut sys = BpaSystem::new(vars[0].clone());
    for x in &vars {
        let body = random_body(&mut rng, &vars, max_branches, max_seq_len);
        sys.equations.insert(x.clone(), body);
    }
    repair(&mut sys);
    sys
}

fn random_body(rng: &mut ChaCha8Rng, vars: &[String], max_branches: usize, max_seq_len: usize) -> BpaExpr {
    let alphabet = &LABELS[..max_branches.clamp(1, LABELS.len()).max(3)];
    let n = rng.gen_range(1..=max_branches.clamp(1, alphabet.len()));
    let mut labels: Vec<&str> = alphabet.choose_multiple(rng, n).copied().collect();
    labels.sort();
    let branches = labels.into_iter().map(|a| random_branch(rng, a, vars, max_seq_len));
    BpaExpr::sum(branches).expect("at least one branch")
}

fn random_branch(rng: &mut ChaCha8Rng, label: &str, vars: &[String], max_seq_len: usize) -> BpaExpr {
    let len = rng.gen_range(0..=max_seq_len);
    let mut atoms = vec![BpaExpr::action(label)];
    for _ in 0..len {
        if rng.gen_bool(0.6) {
            atoms.push(BpaExpr::var(vars.choose(rng).expect("non-empty").clone()));
        } else {
            atoms.push(BpaExpr::action(*LABELS[..3].choose(rng).expect("non-empty")));
        }
    }
    BpaExpr::seq_all(atoms)
}

/// Gives every variable without a terminating run a bare `exit` branch,
/// replacing any earlier `exit` branch.
fn repair(sys: &mut BpaSystem) {
    for (x, n) in sys.norms() {
        if n.is_none() {
            let body = &sys.equations[&x];
            let mut kept: Vec<BpaExpr> =
                body.summands().into_iter().filter(|s| head_label(s).as_deref() != Some(EXIT)).cloned().collect();
            kept.push(BpaExpr::action(EXIT));
            sys.equations[&x] = BpaExpr::sum(kept).expect("non-empty");
        }
    }
}

/// A random system holding two copies of a generated system, the second
/// (over `Y0 ..`) possibly mutated, and the pair of roots to compare. Returns
/// `(system, left, right)`.
pub fn gen_pair(seed: u64, n_vars: usize, max_branches: usize, max_seq_len: usize) -> (BpaSystem, String, String) {
    let base = gen_random(seed, n_vars, max_branches, max_seq_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let rename = |x: &str| format!("Y{}", &x[1..]);
    let vars: Vec<String> = base.equations.keys().cloned().collect();
    let mut sys = base.clone();
    for (x, body) in &base.equations {
        sys.equations.insert(rename(x), rename_vars(body, &rename));
    }
    let target = rename(vars.choose(&mut rng).expect("non-empty"));
    let body = sys.equations[&target].clone();
    let mut summands: Vec<BpaExpr> = body.summands().into_iter().cloned().collect();
    let yvars: Vec<String> = vars.iter().map(|x| rename(x)).collect();
    match rng.gen_range(0..4) {
        0 => {}
        1 => {
            let used: Vec<String> = summands.iter().filter_map(head_label).collect();
            if let Some(a) = LABELS.iter().find(|a| !used.iter().any(|u| u == *a)) {
                summands.push(random_branch(&mut rng, a, &yvars, max_seq_len));
            }
        }
        2 if summands.len() > 1 => {
            let i = rng.gen_range(0..summands.len());
            summands.remove(i);
        }
        _ => {
            let i = rng.gen_range(0..summands.len());
            let a = head_label(&summands[i]).expect("guarded");
            summands[i] = random_branch(&mut rng, &a, &yvars, max_seq_len);
        }
    }
    sys.equations[&target] = BpaExpr::sum(summands).expect("non-empty");
    repair(&mut sys);
    let (l, r) = if rng.gen_bool(0.5) { ("X0".to_string(), "Y0".to_string()) } else { ("Y0".to_string(), "X0".to_string()) };
    (sys, l, r)
}

fn head_label(e: &BpaExpr) -> Option<String> {
    match e.atoms().first() {
        Some(BpaExpr::Action(a)) => Some(a.clone()),
        _ => None,
    }
}

fn rename_vars(e: &BpaExpr, f: &impl Fn(&str) -> String) -> BpaExpr {
    match e {
        BpaExpr::Var(x) => BpaExpr::Var(f(x)),
        BpaExpr::Choice(p, q) => BpaExpr::choice(rename_vars(p, f), rename_vars(q, f)),
        BpaExpr::Seq(p, q) => BpaExpr::seq(rename_vars(p, f), rename_vars(q, f)),
        BpaExpr::Action(_) | BpaExpr::Epsilon => e.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpa::translate;

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(gen_random(11, 4, 3, 3), gen_random(11, 4, 3, 3));
        assert_eq!(gen_pair(5, 3, 2, 2), gen_pair(5, 3, 2, 2));
    }

    #[test]
    fn outputs_are_valid() {
        for seed in 0..200 {
            let s = gen_random(seed, 1 + seed as usize % 5, 1 + seed as usize % 3, 3);
            s.validate().unwrap_or_else(|e| panic!("seed {seed}: {e}\n{s}"));
            assert!(s.norms().values().all(Option::is_some));
            assert_eq!(s.head_normal_form().unwrap(), s, "seed {seed}");
            translate(&s).unwrap();
            let (p, l, r) = gen_pair(seed, 1 + seed as usize % 5, 1 + seed as usize % 3, 3);
            p.validate().unwrap_or_else(|e| panic!("pair {seed}: {e}\n{p}"));
            assert!(p.body(&l).is_some() && p.body(&r).is_some());
        }
    }
}
