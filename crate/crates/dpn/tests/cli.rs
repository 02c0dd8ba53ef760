//! End-to-end tests of the command-line binary: golden outputs, exit
//! codes (0 success / 1 verification failure / 2 usage error), file
//! round trips, and error positions.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dpn"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn frob_apply_golden_image() {
    let dir = tempfile::tempdir().unwrap();
    let u_file = write(
        dir.path(),
        "lambda1.json",
        r#"{"p":3,"n":1,"s":1,"u":[[{"terms":[{"x":[0],"d":[1],"c":1}]}]]}"#,
    );
    let (code, stdout, stderr) = run(&[
        "frob", "apply", "--p", "3", "--s", "1", "--u-file", &u_file, "--expr", "d1[3]",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert_eq!(stdout.trim(), "d1[5] + d1[7] + d1[9]");
}

#[test]
fn frob_recover_canonical_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    let table_path = table.to_str().unwrap();
    let (code, _, stderr) = run(&[
        "frob", "build", "--p", "2", "--n", "1", "--s", "1", "--depth", "2", "--out", table_path,
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");

    let (code, stdout, stderr) = run(&["frob", "recover", "--in", table_path]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let parsed: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(parsed["p"], 2);
    for row in parsed["u"].as_array().unwrap() {
        for entry in row.as_array().unwrap() {
            assert!(
                entry["terms"].as_array().unwrap().is_empty(),
                "canonical map must recover to the zero matrix, got {stdout}"
            );
        }
    }
}

#[test]
fn descent_verify_rejects_perturbed_table_listing_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"p":2,"n":1,"level":0,"bounds":[2],"gens":[[{"terms":[{"x":[0],"d":[1],"c":1}]},{"terms":[{"x":[0],"d":[2],"c":1},{"x":[1],"d":[0],"c":1}]}]]}"#,
    );
    let (code, stdout, _) = run(&["descent", "verify", "--in", &bad]);
    assert_eq!(code, 1);
    assert!(
        stdout.contains("product law fails at alpha = (2), beta = (1)"),
        "must list a failing pair, got:\n{stdout}"
    );
}

#[test]
fn descent_verify_accepts_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("descent.json");
    let path = file.to_str().unwrap();
    let (code, _, _) = run(&[
        "descent", "construct", "--p", "2", "--n", "1", "--bound", "2", "--out", path,
    ]);
    assert_eq!(code, 0);
    let (code, stdout, _) = run(&["descent", "verify", "--in", path]);
    assert_eq!(code, 0, "stdout: {stdout}");
    assert!(stdout.contains("shift law: all"));
    assert!(stdout.contains("product law: all"));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let (code, _, stderr) = run(&["mul", "--p", "5", "--expr", "d1[1", "--expr", "x1"]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("line 1, column 5"),
        "unclosed bracket must point at column 5, got: {stderr}"
    );

    let (code, _, stderr) = run(&["mul", "--p", "5", "--expr", "x2", "--expr", "x1"]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("index 2 is outside the range 1..=1"),
        "got: {stderr}"
    );
}

#[test]
fn mul_and_commutator_goldens() {
    let (code, stdout, _) = run(&["mul", "--p", "2", "--expr", "x1*d1[1]", "--expr", "x1"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "x1 + x1^2*d1[1]");

    let (code, stdout, _) = run(&[
        "commutator", "--p", "2", "--expr", "d1[2]", "--expr", "x1^2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "1");

    let (code, stdout, _) = run(&[
        "mul", "--p", "2", "--json", "--expr", "x1*d1[1]", "--expr", "x1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        stdout.trim(),
        r#"{"p":2,"n":1,"terms":[{"x":[1],"d":[0],"c":1},{"x":[2],"d":[1],"c":1}]}"#
    );
}

#[test]
fn apply_acts_on_polynomials() {
    let (code, stdout, _) = run(&[
        "apply", "--p", "3", "--expr", "d1[2]", "--expr", "x1^4 + 2*x1^2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "2");

    // The right-hand expression must be a polynomial.
    let (code, _, stderr) = run(&["apply", "--p", "3", "--expr", "d1[2]", "--expr", "d1[1]"]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());
}

#[test]
fn scalars_reduce_modulo_p_at_parse_time() {
    let (code, stdout, _) = run(&["mul", "--p", "3", "--expr", "7", "--expr", "x1"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "x1", "7 = 1 mod 3");
}

#[test]
fn struct_member_exit_codes() {
    let (code, stdout, _) = run(&[
        "struct", "member", "--p", "2", "--n", "1", "dp-centralizer:1:0", "--expr", "x1^2*d1[1]",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("member"));

    let (code, stdout, _) = run(&[
        "struct", "member", "--p", "2", "--n", "1", "dp-centralizer:1:0", "--expr", "x1*d1[1]",
    ]);
    assert_eq!(code, 1);
    assert!(stdout.contains("not a member"));

    let (code, _, stderr) = run(&[
        "struct", "member", "--p", "2", "--n", "1", "no-such-subalgebra", "--expr", "x1",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown subalgebra"));

    let (code, _, stderr) = run(&[
        "struct", "member", "--p", "2", "--n", "2", "dp-centralizer-joint:0", "--expr", "x1",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("expected 2 comma-separated levels"));
}

#[test]
fn struct_basis_lists_monomials() {
    let (code, stdout, _) = run(&[
        "struct", "basis", "--p", "2", "--n", "1", "scalar-operators", "--bound", "2",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.trim().lines().collect();
    assert_eq!(lines, vec!["1", "d1[1]", "d1[2]"]);
}

#[test]
fn struct_decompose_reports_coordinates() {
    let (code, stdout, _) = run(&[
        "struct", "decompose", "--p", "2", "--n", "1", "--expr", "x1^3*d1[5]",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("x1*d1[1] : x1*d1[2]"));
    assert!(stdout.contains("nonzero coefficients: 1 of 4"));
}

#[test]
fn struct_rigidity_accepts_canonical_and_rejects_files() {
    let (code, stdout, _) = run(&["struct", "rigidity", "--p", "2", "--n", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("all"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"p":2,"n":1,"level":0,"bounds":[1],"gens":[[{"terms":[{"x":[0],"d":[1],"c":1},{"x":[1],"d":[0],"c":1}]}]]}"#,
    );
    let (code, stdout, _) = run(&["struct", "rigidity", "--in", &bad]);
    assert_eq!(code, 1);
    assert!(stdout.contains("p-th power"), "got: {stdout}");
}

#[test]
fn frob_verify_passes_for_built_maps() {
    let (code, stdout, _) = run(&[
        "frob", "verify", "--p", "2", "--n", "1", "--s", "1", "--depth", "2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("homomorphism: all"));
    assert!(stdout.contains("endomorphism axioms: all"));
}

#[test]
fn descent_construct_from_seed_file_returns_canonical() {
    let dir = tempfile::tempdir().unwrap();
    // Seeds: d1[1] and d1[2] + d1[1] — admissible but not canonical.
    let seeds = write(
        dir.path(),
        "seeds.json",
        r#"{"p":2,"n":1,"level":0,"bounds":[2],"gens":[[{"terms":[{"x":[0],"d":[1],"c":1}]},{"terms":[{"x":[0],"d":[2],"c":1},{"x":[0],"d":[1],"c":1}]}]]}"#,
    );
    let (code, stdout, stderr) = run(&["descent", "construct", "--in", &seeds]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let parsed: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(
        parsed["gens"][0][0]["terms"],
        serde_json::json!([{"x": [0], "d": [1], "c": 1}])
    );
    assert_eq!(
        parsed["gens"][0][1]["terms"],
        serde_json::json!([{"x": [0], "d": [2], "c": 1}]),
        "the construction must project the seed back to the canonical generator"
    );
}

#[test]
fn descent_classify_reports_zero_for_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.json");
    let path = file.to_str().unwrap();
    run(&[
        "descent", "construct", "--p", "2", "--n", "1", "--bound", "2", "--out", path,
    ]);
    let (code, stdout, _) = run(&["descent", "classify", "--in", path]);
    assert_eq!(code, 0);
    assert!(stdout.contains("lambda[1][0] = 0"));
    assert!(stdout.contains("lambda[1][1] = 0"));
}

#[test]
fn descent_normalize_emits_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.json");
    let path = file.to_str().unwrap();
    run(&[
        "descent", "construct", "--p", "2", "--n", "1", "--bound", "2", "--out", path,
    ]);
    let (code, stdout, _) = run(&["descent", "normalize", "--in", path]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(parsed["table"].as_array().unwrap().len(), 4);
}

#[test]
fn missing_and_contradictory_inputs_are_usage_errors() {
    let (code, _, stderr) = run(&["mul", "--expr", "x1", "--expr", "x1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--p is required"));

    let (code, _, stderr) = run(&["descent", "verify", "--p", "2"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--in"));

    let (code, _, stderr) = run(&["frob", "apply", "--in", "/nonexistent/x.json", "--expr", "d1[1]"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("cannot read"));

    let dir = tempfile::tempdir().unwrap();
    let u_file = write(
        dir.path(),
        "u.json",
        r#"{"p":3,"n":1,"s":1,"u":[[{"terms":[{"x":[0],"d":[1],"c":1}]}]]}"#,
    );
    let (code, _, stderr) = run(&[
        "frob", "apply", "--p", "2", "--u-file", &u_file, "--expr", "d1[1]",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("contradicts the file header"));

    // Malformed JSON file.
    let broken = write(dir.path(), "broken.json", "{not json");
    let (code, _, _) = run(&["frob", "apply", "--u-file", &broken, "--expr", "d1[1]"]);
    assert_eq!(code, 2);

    // Unreduced coefficient inside an element file.
    let unreduced = write(
        dir.path(),
        "unreduced.json",
        r#"{"p":3,"n":1,"s":1,"u":[[{"terms":[{"x":[0],"d":[1],"c":5}]}]]}"#,
    );
    let (code, _, stderr) = run(&["frob", "apply", "--u-file", &unreduced, "--expr", "d1[1]"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("reduced"), "got: {stderr}");
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("result.txt");
    let path = file.to_str().unwrap();
    let (code, stdout, _) = run(&[
        "mul", "--p", "2", "--expr", "d1[1]", "--expr", "d1[1]", "--out", path,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().trim(), "0");
}

#[test]
fn wrong_operand_counts_are_usage_errors() {
    let (code, _, stderr) = run(&["mul", "--p", "2", "--expr", "x1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("exactly two"));

    let (code, _, stderr) = run(&[
        "frob", "apply", "--p", "2", "--s", "1", "--expr", "x1", "--expr", "x1",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("exactly one"));
}
