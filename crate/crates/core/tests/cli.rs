use std::process::{Command, Output};

fn qprove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprove")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn set_reports_canonical_form_and_gap() {
    let out = qprove(&["set", "{2}* + {3}* + {1}", "--bound", "6"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "expression\t{2}* + {3}* + {1}\ncanonical\t([2,3],1)\nmembers\t1 3 4 5 6\ngap\t2\n"
    );
}

#[test]
fn spectrum_agrees_below_threshold() {
    let out = qprove(&["spectrum", "2*x1+3*x2+1", "--cutoff", "3"]);
    let text = stdout(&out);
    assert!(text.contains("spectrum\t1 3 4 5 6 7 8 9 11\n"), "{text}");
    assert!(text.contains("threshold\t7\n"));
    assert!(text.ends_with("agreement\tOK\n"));
}

#[test]
fn prove_emits_a_checkable_proof() {
    let dir = std::env::temp_dir().join(format!("qprove-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let state = dir.join("state.json");
    std::fs::write(&state, r#"{"kind":"uniform","k":2,"cutoff":3}"#).unwrap();
    let out = qprove(&["prove", "x1^2+x2", "--state", state.to_str().unwrap(), "--seed", "11"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let proof: Vec<u64> = serde_json::from_value(v["proof"].clone()).unwrap();
    assert_eq!(v["theorem"].as_u64().unwrap(), proof[0] * proof[0] + proof[1]);
}

#[test]
fn errors_map_to_exit_codes() {
    let bad_expr = qprove(&["set", "{"]);
    assert_eq!(bad_expr.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&bad_expr.stderr).lines().count(), 1);
    assert_eq!(qprove(&["spectrum", "x1", "--cutoff", "0"]).status.code(), Some(1));
    assert_eq!(qprove(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qprove(&["measure", "x1", "--state", "/nonexistent/state.json"]).status.code(), Some(2));
}
