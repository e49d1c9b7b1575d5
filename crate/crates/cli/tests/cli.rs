use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticeforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn err(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    assert!(serde_json::from_slice::<Value>(&out.stderr).is_err());
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_examples() {
    let v = ok(&["classify", "3*D4 + 2*U"]);
    assert_eq!(
        v,
        json!({"rho": 6, "ell": 6, "d": 64, "kappa": "1", "verdict": "PotentiallyIrrational"})
    );
    let v = ok(&["classify", "--explain", "A2 + 2*E8 + 2*U"]);
    assert_eq!(v["kappa"], "1/3");
    assert!(v["reasons"].as_array().is_some_and(|r| !r.is_empty()));
    assert_eq!(ok(&["classify", "D4 + E8 + U(2) + U"])["verdict"], "AssociatedK3Unique");
}

#[test]
fn scalar_commands() {
    assert_eq!(ok(&["kappa", "--rho", "0", "--d", "3"]), json!({"kappa": "1/3"}));
    assert_eq!(ok(&["kappa", "--rho", "6", "--d", "64"]), json!({"kappa": "1"}));
    assert_eq!(ok(&["hassett", "--d", "12"])["potentially_irrational"], true);
    assert_eq!(ok(&["hassett", "--d", "14"])["potentially_irrational"], false);
    let e = ok(&["exists-2elem", "--tplus", "5", "--tminus", "1", "--l", "6", "--delta", "0"]);
    assert_eq!(e, json!({"exists": false}));
    let e = ok(&["exists-2elem", "--tplus", "14", "--tminus", "2", "--l", "6", "--delta", "0"]);
    assert_eq!(e, json!({"exists": true}));
}

#[test]
fn enumerate_output() {
    let v = ok(&["enumerate"]);
    assert_eq!(v["candidates"], json!([[6, 0]]));
    assert_eq!(v["delta0_t_exists"], json!([2, 6, 10]));
    assert_eq!(v["delta0_m_exists"], json!([2, 10]));
}

#[test]
fn lattice_commands() {
    let inv = ok(&["invariants", "3*D4 + 2*U"]);
    assert_eq!(inv["rank"], 16);
    assert_eq!(inv["signature"], json!([14, 2]));
    assert_eq!(inv["det"], 64);
    assert_eq!(inv["delta"], 0);
    assert_eq!(ok(&["discform", "A2"]), json!({"orders": [3], "q": ["2/3"], "b": [["2/3"]]}));
    assert_eq!(ok(&["shortvec", "E6(2)", "--bound", "4"])["counts"], json!({"4": 72}));
    assert_eq!(ok(&["orthgroup", "D4"]), json!({"order": 6}));
    assert_eq!(ok(&["isometry", "A2", "A2"]), json!({"isometric": true}));
    let c = ok(&["complement", "A2", "--basis", "[[1,0]]"]);
    assert_eq!(c["gram"], json!([[6]]));
    let g = ok(&["glue", "U(2)", "--generators", r#"[["1/2","0"]]"#]);
    assert_eq!(g["index"], 2);
    assert_eq!(g["det"], -1);
    let g = ok(&["glue", "E6(2)", "--with", "3*D4 + 2*U", "--prime", "2"]);
    assert_eq!(g["det"], 3);
    assert_eq!(g["index"], 64);
}

#[test]
fn file_input_and_determinism() {
    let dir = std::env::temp_dir().join(format!("latticeforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let gram = ok(&["glue", "E6(2)", "--with", "3*D4 + 2*U", "--prime", "2"]);
    std::fs::write(&path, json!({"gram": gram["gram"]}).to_string()).unwrap();
    let arg = format!("@{}", path.display());
    let v = ok(&["classify", &arg]);
    assert_eq!(v["rho"], 0);
    assert_eq!(v["d"], 3);
    let a = run(&["classify", &arg]).stdout;
    let b = run(&["classify", &arg]).stdout;
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn errors_exit_two() {
    assert_eq!(err(&["classify", "Q3"])["code"], "UnknownName");
    assert_eq!(err(&["classify", "A2 +"])["code"], "SyntaxError");
    assert_eq!(err(&["classify", "@/nonexistent/file.json"])["code"], "InvalidInput");
    assert_eq!(err(&["kappa", "--rho", "1", "--d", "0"])["code"], "NonPositiveD");
    assert_eq!(err(&["hassett", "--d", "7"])["code"], "InvalidDiscriminant");
    assert_eq!(err(&["shortvec", "U", "--bound", "2"])["code"], "NotPositiveDefinite");
    assert_eq!(err(&["discform", "<1>"])["code"], "OddLattice");
    assert_eq!(err(&["classify", "E8"])["code"], "WrongSignature");
    let big = err(&["orthgroup", "9*U(2)"]);
    assert_eq!(big["code"], "GroupTooLarge");
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn group_limit_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_latticeforge"))
        .args(["orthgroup", "D4"])
        .env("LATTICEFORGE_MAX_GROUP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["code"], "GroupTooLarge");
}
