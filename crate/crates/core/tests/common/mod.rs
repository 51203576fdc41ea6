#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nestsub::syntax::{parse_program, Type};
use nestsub::variance::{infer_variances, Signature};

pub const CORPUS: [&str; 9] = [
    "nat.nsub",
    "lists.nsub",
    "hlist.nsub",
    "stack.nsub",
    "queue.nsub",
    "stack_poly.nsub",
    "dyck.nsub",
    "twin.nsub",
    "twin_unseeded.nsub",
];

pub fn corpus(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Definitions that random types are built over.
pub const BASE: &str = "
type nat = +{z : 1, s : nat}
type even = +{z : 1, s : odd}
type odd = +{s : even}
type List[a] = +{nil : 1, cons : a * List[a]}
type Seg[a] = List[a] -o List[a]
type Server[a] = &{get : a * Server[a], stop : 1}
type Pair[a][b] = a * b
";

pub fn base_sig() -> Signature {
    infer_variances(&Signature::from_program(&parse_program(BASE).unwrap()))
}

const LABELS: [&str; 3] = ["l", "m", "n"];

/// A random closed, quantifier-free type over [`BASE`] of nesting depth at most `depth`.
pub fn random_type(rng: &mut ChaCha8Rng, depth: usize) -> Type {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Type::One,
            1 => Type::named("nat"),
            2 => Type::named("even"),
            _ => Type::named("odd"),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 | 1 => Type::Plus(choices(rng, d)),
        2 => Type::With(choices(rng, d)),
        3 => Type::tensor(random_type(rng, d), random_type(rng, d)),
        4 => Type::lolli(random_type(rng, d), random_type(rng, d)),
        5 => Type::app("List", vec![("a".into(), random_type(rng, d))]),
        6 => Type::app(*["Seg", "Server"].choose(rng).unwrap(), vec![("a".into(), random_type(rng, d))]),
        _ => Type::app("Pair", vec![("a".into(), random_type(rng, d)), ("b".into(), random_type(rng, d))]),
    }
}

fn choices(rng: &mut ChaCha8Rng, depth: usize) -> nestsub::syntax::Choices {
    let n = rng.gen_range(1..=LABELS.len());
    LABELS.choose_multiple(rng, n).map(|l| (l.to_string(), random_type(rng, depth))).collect()
}

/// A random supertype of `t` (or subtype when `up` is false) over [`BASE`],
/// by adding internal choice labels, dropping external choice labels and
/// widening `even` and `odd` to `nat`. Named applications are kept as they are.
pub fn widen(rng: &mut ChaCha8Rng, t: &Type, up: bool) -> Type {
    match t {
        Type::Named(n, args) if args.is_empty() && up && (n == "even" || n == "odd") && rng.gen_bool(0.5) => {
            Type::named("nat")
        }
        Type::Plus(ch) => {
            let mut ch: nestsub::syntax::Choices = ch.iter().map(|(l, b)| (l.clone(), widen(rng, b, up))).collect();
            if up && rng.gen_bool(0.3) {
                if let Some(l) = LABELS.iter().find(|l| !ch.contains_key(**l)) {
                    ch.insert(l.to_string(), random_type(rng, 1));
                }
            } else if !up && ch.len() > 1 && rng.gen_bool(0.3) {
                let first = ch.keys().next().cloned().unwrap();
                ch.remove(&first);
            }
            Type::Plus(ch)
        }
        Type::With(ch) => {
            let mut ch: nestsub::syntax::Choices = ch.iter().map(|(l, b)| (l.clone(), widen(rng, b, up))).collect();
            if !up && rng.gen_bool(0.3) {
                if let Some(l) = LABELS.iter().find(|l| !ch.contains_key(**l)) {
                    ch.insert(l.to_string(), random_type(rng, 1));
                }
            } else if up && ch.len() > 1 && rng.gen_bool(0.3) {
                let first = ch.keys().next().cloned().unwrap();
                ch.remove(&first);
            }
            Type::With(ch)
        }
        Type::Tensor(a, b) => Type::tensor(widen(rng, a, up), widen(rng, b, up)),
        Type::Lolli(a, b) => Type::lolli(widen(rng, a, !up), widen(rng, b, up)),
        _ => t.clone(),
    }
}
