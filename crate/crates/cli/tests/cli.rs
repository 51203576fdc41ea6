use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nestsub"));
    c.env_remove("NESTSUB_DEPTH");
    c
}

fn path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn corpus(name: &str) -> PathBuf {
    path("../core/corpus").join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("binary runs");
    (status.code().expect("exit code"), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn check_exit_codes() {
    let (code, out, _) = run(bin().arg("check").arg(corpus("stack.nsub")));
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(bin().arg("check").arg(corpus("nat.nsub")));
    assert_eq!(code, 1);
    assert!(out.contains("check nat <= even: not subtype"), "{out}");
    assert!(out.contains("check even <= nat: subtype"), "{out}");
    let (code, _, _) = run(bin().arg("check").arg(path("tests/data/dyck_unseeded.nsub")));
    assert_eq!(code, 2);
    let (code, _, err) = run(bin().arg("check").arg(path("tests/data/malformed.nsub")));
    assert_eq!(code, 3);
    assert!(err.contains("1:17"), "{err}");
    let (code, _, err) = run(bin().arg("check").arg(corpus("bad_seed.nsub")));
    assert_eq!(code, 3);
    assert!(err.contains("eqtype"), "{err}");
    let (code, _, _) = run(bin().arg("check").arg(path("tests/data/missing.nsub")));
    assert_eq!(code, 3);
}

#[test]
fn json_matches_golden_file() {
    let (code, out, _) = run(bin().args(["check", "--json"]).arg(corpus("nat.nsub")));
    assert_eq!(code, 1);
    let golden = std::fs::read_to_string(path("tests/golden/nat.json")).unwrap();
    assert_eq!(out.trim_end(), golden.trim_end());
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    for r in records {
        for key in ["goal", "verdict", "depth_used", "seeds_used"] {
            assert!(r.get(key).is_some(), "{r}");
        }
        assert!(["subtype", "not_subtype", "unknown"].contains(&r["verdict"].as_str().unwrap()));
    }
}

#[test]
fn depth_from_flag_and_environment() {
    let file = corpus("twin_unseeded.nsub");
    let (code, out, _) = run(bin().args(["check", "--json", "--depth", "7"]).arg(&file));
    assert_eq!(code, 2);
    assert!(out.contains("\"depth_used\": 7"), "{out}");
    let (_, out, _) = run(bin().args(["check", "--json"]).arg(&file).env("NESTSUB_DEPTH", "9"));
    assert!(out.contains("\"depth_used\": 9"), "{out}");
    let (_, out, _) = run(bin().args(["check", "--json", "--depth", "4"]).arg(&file).env("NESTSUB_DEPTH", "9"));
    assert!(out.contains("\"depth_used\": 4"), "{out}");
    let (code, _, _) = run(bin().arg("check").arg(&file).env("NESTSUB_DEPTH", "lots"));
    assert_eq!(code, 3);
}

#[test]
fn trace_prints_derivations() {
    let (code, out, _) = run(bin().args(["check", "--trace"]).arg(corpus("twin.nsub")));
    assert_eq!(code, 0);
    assert!(out.contains("def "), "{out}");
    assert!(out.contains("expd "), "{out}");
}

#[test]
fn validate_prints_variances() {
    let (code, out, _) = run(bin().arg("validate").arg(corpus("lists.nsub")));
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "List[a # +]"), "{out}");
    assert!(out.lines().any(|l| l == "Seg[a # ⊤]"), "{out}");
    let (code, out, _) = run(bin().arg("validate").arg(path("tests/data/unused.nsub")));
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "Const[a # ⊥]"), "{out}");
    assert!(out.lines().any(|l| l == "Pair[a # +][b # ⊥]"), "{out}");
    let (code, _, err) = run(bin().arg("validate").arg(path("tests/data/duplicate.nsub")));
    assert_eq!(code, 3);
    assert!(err.contains("duplicate"), "{err}");
    let (code, out, _) = run(bin().args(["validate", "--json"]).arg(corpus("lists.nsub")));
    assert_eq!(code, 0);
    assert!(out.contains("\"variance\": \"+\""), "{out}");
}

#[test]
fn bpa_translate() {
    let (code, out, _) = run(bin().args(["bpa", "translate"]).arg(path("tests/data/example.bpa")));
    assert_eq!(code, 0);
    assert!(out.contains("type X0[alpha] = +{a: X0[+{c: alpha}], b: X1[alpha]}"), "{out}");
    assert!(out.contains("type X1[alpha] = +{a: alpha}"), "{out}");
    let (code, out, _) =
        run(bin().args(["bpa", "translate"]).arg(path("tests/data/example.bpa")).args(["--check", "X1", "X0"]));
    assert_eq!(code, 0);
    assert!(out.contains("check X1[1] <= X0[1]"), "{out}");

    // The emitted file is itself a valid input.
    let dir = std::env::temp_dir().join(format!("nestsub-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("example.nsub");
    std::fs::write(&file, &out).unwrap();
    let (code, out, _) = run(bin().arg("check").arg(&file));
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("not subtype"), "{out}");
    std::fs::remove_dir_all(&dir).ok();

    let (code, _, err) = run(bin().args(["bpa", "translate"]).arg(path("tests/data/unguarded.bpa")));
    assert_eq!(code, 3);
    assert!(err.contains("not guarded"), "{err}");
    let (code, _, _) = run(bin().args(["bpa", "translate", "--root", "Nope"]).arg(path("tests/data/example.bpa")));
    assert_eq!(code, 3);
}

#[test]
fn bpa_include() {
    let ex = path("tests/data/example.bpa");
    let (code, out, _) = run(bin().args(["bpa", "include"]).arg(&ex).args(["X1", "X0", "--bound", "4"]));
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "witness \"a\"");
    let (code, out, _) = run(bin().args(["bpa", "include"]).arg(&ex).args(["X0", "X0", "--bound", "6"]));
    assert_eq!(code, 0);
    assert!(out.starts_with("included"), "{out}");
}

#[test]
fn bpa_gen_is_deterministic_and_parses() {
    let args = ["bpa", "gen", "--seed", "42", "--vars", "4", "--branches", "3", "--seqlen", "2"];
    let (code, a, _) = run(bin().args(args));
    assert_eq!(code, 0);
    let (_, b, _) = run(bin().args(args));
    assert_eq!(a, b);
    let sys = nestsub::bpa::parse_bpa(&a).unwrap();
    sys.validate().unwrap();
    assert_eq!(sys.equations.len(), 4);
    let (code, _, _) = run(bin().args(["bpa", "gen", "--seed", "1", "--vars", "0"]));
    assert_eq!(code, 3);
}

#[test]
fn bpa_fuzz() {
    let (code, out, _) = run(bin().args(["bpa", "fuzz", "--n", "200", "--seed", "7", "--bound", "10"]));
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().any(|l| l == "0 violations"), "{out}");
    let (code, out, _) = run(bin().args(["bpa", "fuzz", "--n", "40", "--seed", "7", "--mutate"]));
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("violation: "), "{out}");
}
