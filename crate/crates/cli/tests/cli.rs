use std::path::PathBuf;
use std::process::{Command, Output};

fn ptykes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptykes")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    ptykes(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(ptykes(args).stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ptykes-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn audits_pass_on_lawful_objects() {
    assert_eq!(code(&["audit", "omega", "--arity", "3", "--budget", "40"]), 0);
    assert_eq!(code(&["audit", "star(succ)", "--arity", "2"]), 0);
    assert_eq!(code(&["audit", "zeta:len:0", "--arity", "2", "--budget", "10"]), 0);
    assert!(stdout(&["audit", "omega"]).contains("0 violations"));
}

#[test]
fn corrupted_fragment_fails_its_audit() {
    let good = scratch("omega.frag");
    assert_eq!(code(&["encode", "omega", "--arity", "2", "--budget", "6", "-o", good.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(&good).unwrap();
    assert_eq!(code(&["audit", good.to_str().unwrap(), "--arity", "2", "--budget", "11"]), 0);

    // Claim the element ⟨0⟩ of arity 1 has empty support.
    assert!(text.lines().any(|l| l == "(3,1,1,1)"));
    let bad = scratch("omega-bad.frag");
    std::fs::write(&bad, text.replace("(3,1,1,1)\n", "(3,1,1,0)\n")).unwrap();
    let out = ptykes(&["audit", bad.to_str().unwrap(), "--arity", "2", "--budget", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("support condition"));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(code(&["audit", "sum(succ"]), 2);
    assert_eq!(code(&["probe", "omega", "--arg", "bogus"]), 2);
    let junk = scratch("junk.frag");
    std::fs::write(&junk, "garbage\n").unwrap();
    assert_eq!(code(&["audit", junk.to_str().unwrap()]), 2);
}

#[test]
fn probes() {
    assert_eq!(code(&["probe", "fixpoint(succ)", "--arg", "fin:0", "--len", "20"]), 1);
    assert_eq!(code(&["probe", "omega", "--arg", "omega", "--len", "10"]), 0);
    let out = stdout(&["probe", "dpsi:len:1", "--arg", "kbwitness:len:1", "--len", "10"]);
    assert!(out.starts_with("branch of length 10"));
    assert_eq!(code(&["probe", "dpsi:len:1", "--arg", "kbwitness:len:1", "--len", "10"]), 1);
}

#[test]
fn dumps() {
    let out = stdout(&["dump", "omega", "--arg", "fin:2", "--count", "5"]);
    let pretty: Vec<&str> = out.lines().map(|l| l.split('\t').nth(2).unwrap()).collect();
    assert_eq!(pretty, ["⟨⟩", "⟨0⟩", "⟨0,0⟩", "⟨0,0,0⟩", "⟨0,0,0,0⟩"]);

    let out = stdout(&["dump", "fixpoint(succ)", "--arg", "fin:0", "--count", "3"]);
    let pretty: Vec<&str> = out.lines().map(|l| l.split('\t').nth(2).unwrap()).collect();
    assert_eq!(pretty, ["(3,↑↑⊤)", "(2,↑⊤)", "(1,⊤)"]);
}

#[test]
fn encode_decode_round_trip_is_byte_identical() {
    for expr in ["omega", "fin:3", "dpsi:len:0", "apply(succ, omega)"] {
        let a = scratch("a.frag");
        let b = scratch("b.frag");
        assert_eq!(code(&["encode", expr, "--arity", "2", "--budget", "8", "-o", a.to_str().unwrap()]), 0);
        assert_eq!(code(&["decode", a.to_str().unwrap(), "-o", b.to_str().unwrap()]), 0);
        let again = ptykes(&["encode", b.to_str().unwrap(), "--arity", "2", "--budget", "8"]).stdout;
        let first = std::fs::read(&a).unwrap();
        assert_eq!(first, std::fs::read(&b).unwrap(), "{expr}");
        assert_eq!(first, again, "{expr}");
    }
}

#[test]
fn fixpoint_round_trips() {
    for p in ["succ", "const:omega", "star(succ)"] {
        let out = ptykes(&["fixpoint", p, "--arity", "2", "--dump", "5"]);
        assert_eq!(out.status.code(), Some(0), "{p}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("round trip holds"));
    }
}
