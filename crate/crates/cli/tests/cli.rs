use std::collections::BTreeMap;
use std::process::Command;

use strongdiv_cli::format::{parse_module_file, render_module_file};

const FIXTURE: &str = "\
kmod 1
ctx p=3 N=4 M=30 E=3,0,1
kisin T rank=1
frob T 0 0 3,0,1
kisin M rank=2
frob M 0 0 1
frob M 0 1 0,-1
frob M 1 1 3,0,1
kisin U rank=1
frob U 0 0 1
morphism a src=T dst=M
mat a 0 0 0,-1
mat a 1 0 3
morphism b src=M dst=U
mat b 0 0 3
mat b 0 1 0,1
breuil MB from=M r=1
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strongdiv"))
}

fn fixture_path() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("strongdiv-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ex.kmod");
    std::fs::write(&path, FIXTURE).unwrap();
    path
}

#[test]
fn module_file_round_trip() {
    let f = parse_module_file(FIXTURE).unwrap();
    let rendered = render_module_file(&f);
    let reparsed = parse_module_file(&rendered).unwrap();
    assert_eq!(rendered, render_module_file(&reparsed));
    assert_eq!(f.kisin.len(), 3);
    assert_eq!(f.morphisms.len(), 2);
    assert_eq!(f.breuil.len(), 1);
}

#[test]
fn minimal_file_is_empty() {
    let f = parse_module_file("kmod 1\nctx p=3 N=4 M=30 E=3,0,1\n").unwrap();
    assert!(f.kisin.is_empty() && f.morphisms.is_empty());
}

#[test]
fn unknown_directive_has_position() {
    let e = parse_module_file("kmod 1\nctx p=3 N=4 M=30 E=3,0,1\nbogus x\n").unwrap_err();
    assert_eq!((e.line, e.col), (3, 1));
}

#[test]
fn unknown_field_has_position() {
    let e =
        parse_module_file("kmod 1\nctx p=3 N=4 M=30 E=3,0,1\nkisin T rank=1 extra=2 more=3\n")
            .unwrap_err();
    assert_eq!(e.line, 3);
    assert!(e.msg.contains("unknown extra field"), "{}", e.msg);
}

#[test]
fn non_eisenstein_rejected() {
    let e = parse_module_file("kmod 1\nctx p=3 N=4 M=30 E=1,0,1\n").unwrap_err();
    assert!(e.msg.contains("non-Eisenstein"), "{}", e.msg);
}

#[test]
fn invalid_morphism_rejected() {
    let mut text = String::from(FIXTURE);
    text.push_str("morphism c src=T dst=U\nmat c 0 0 0,1\n");
    let e = parse_module_file(&text).unwrap_err();
    assert!(e.msg.contains("not Frobenius-compatible"), "{}", e.msg);
}

#[test]
fn ctx_new_exit_codes() {
    let out = bin().args(["ctx", "new", "--p", "3", "--N", "4", "--M", "30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ctx p=3 N=4 M=30 E=3,0,1"));

    let out = bin()
        .args(["ctx", "new", "--p", "3", "--N", "4", "--M", "30", "--E", "1,0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_error_is_exit_3() {
    let out = bin().args(["kisin", "height", "--nope", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn height_failure_is_exit_1_with_witness() {
    let file = fixture_path();
    let out = bin()
        .args(["kisin", "height", "--file"])
        .arg(&file)
        .args(["--name", "T", "--r", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("height-le-0 fail"), "{}", text);
    assert!(text.contains("witness"), "{}", text);
}

#[test]
fn seq_check_noncomposable_is_exit_3() {
    let file = fixture_path();
    let out = bin()
        .args(["seq", "check", "--file"])
        .arg(&file)
        .args(["--names", "b,a"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not compose"));
}

#[test]
fn seq_check_nonsurjective_tail_fails() {
    let file = fixture_path();
    let out = bin()
        .args(["seq", "check", "--file"])
        .arg(&file)
        .args(["--names", "a,b"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("tail-surjective fail"), "{}", text);
}

#[test]
fn breuil_axioms_pass() {
    let file = fixture_path();
    let out = bin()
        .args(["breuil", "axioms", "--file"])
        .arg(&file)
        .args(["--name", "MB"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn paper_counterexample_passes() {
    let out = bin()
        .args(["paper", "counterexample", "--p", "3", "--N", "4", "--M", "30"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("base-change-middle-cohomology-nonzero pass"), "{}", text);
}

#[test]
fn paper_tor_passes() {
    let out =
        bin().args(["paper", "tor", "--p", "3", "--N", "4", "--M", "30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("witness-class-nonzero pass"), "{}", text);
}

fn human_verdicts(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter(|l| l.starts_with("claim "))
        .map(|l| {
            let mut it = l.split_whitespace();
            it.next();
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect()
}

#[test]
fn json_and_human_verdicts_match() {
    let args = ["paper", "twists", "--p", "3", "--N", "4", "--M", "30", "--r-max", "1"];
    let human = bin().args(args).output().unwrap();
    let json = bin().args(args).arg("--json").output().unwrap();
    assert_eq!(human.status.code(), json.status.code());
    let hv = human_verdicts(&String::from_utf8_lossy(&human.stdout));
    let parsed: serde_json::Value =
        serde_json::from_slice(&json.stdout).expect("valid JSON report");
    let jv: BTreeMap<String, String> = parsed["claims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (c["name"].as_str().unwrap().to_string(), c["verdict"].as_str().unwrap().to_string())
        })
        .collect();
    assert_eq!(hv, jv);
    assert!(!hv.is_empty());
    // canonical ordering: sorted by claim name
    let names: Vec<&String> = hv.keys().collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn seed_env_var_matches_flag() {
    let strip = |out: &[u8]| {
        String::from_utf8_lossy(out)
            .lines()
            .filter(|l| l.starts_with("claim ") || l.starts_with("seed "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let args = ["paper", "key-lemma", "--p", "3", "--N", "4", "--M", "30", "--trials", "5"];
    let flagged = bin().args(args).args(["--seed", "99"]).output().unwrap();
    let from_env = bin().args(args).env("STRONGDIV_SEED", "99").output().unwrap();
    assert_eq!(strip(&flagged.stdout), strip(&from_env.stdout));
    assert!(strip(&flagged.stdout).contains("seed 0x63"));
}
