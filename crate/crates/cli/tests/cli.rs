use hardy_copson_cli::{run, ProblemConfig};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hcopson").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("covering"));
    assert_eq!(call(&["--version"]).0, 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["conditions", "--p", "0.5"]).0, 2);
    assert_eq!(call(&["conditions", "--u", "bogus:1"]).0, 2);
    assert_eq!(call(&["estimate", "--grid", "4,1e-3"]).0, 2);
    assert_eq!(call(&["conditions", "--sweep", "s=1:2:1"]).0, 2);
    assert_eq!(call(&["nonsense"]).0, 2);
    let (_, _, err) = call(&["conditions", "--u", "table:/nonexistent/file.csv"]);
    assert!(err.contains("nonexistent"));
}

#[test]
fn degenerate_covering_exits_three_with_report() {
    let (code, out, _) = call(&["covering", "--u", "exp:1,0,1"]);
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "covering");
    assert!(!v["errors"].as_array().unwrap().is_empty());
    let ok = json(&["covering", "--u", "exp:1,0,1", "--allow-degenerate"]);
    assert_eq!(ok["result"]["covering"]["dropped_degenerate"], true);
}

#[test]
fn covering_table_lists_ln3() {
    let (code, out, _) = call(&["covering", "--kmin", "-3", "--format", "table"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["k", "x_k", "block_integral", "ratio", "pass"]);
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("1 ") && last.contains("1.0986122886681"), "{last}");
}

#[test]
fn conditions_csv_columns() {
    let (code, out, _) = call(&["conditions", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "family,name,value,finite,defined");
    assert!(out.lines().any(|l| l.starts_with("F,F1,")));
    assert!(out.lines().last().unwrap().starts_with("combined,F1+F2,"));
}

#[test]
fn conditions_json_shape() {
    let v = json(&["conditions", "--w", "const:1"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["regime"], "a");
    assert_eq!(v["result"]["F"]["F1"]["value"], Value::Null);
    assert_eq!(v["result"]["F"]["F1"]["finite"], false);
    assert_eq!(v["result"]["F"]["F3"]["defined"], false);
}

#[test]
fn evaluate_known_values() {
    let v = json(&["evaluate", "--u", "exp:1,0,1", "--w", "exp:1,0,1", "--q", "1", "--r", "1", "--allow-degenerate"]);
    let main = v["result"]["lhs_main"].as_f64().unwrap();
    let e1 = (-1f64).exp();
    assert!((main - (0.75 - e1 + e1 * e1 / 4.0)).abs() < 1e-6);
    assert_eq!(v["result"]["rhs"].as_f64().unwrap(), 1.0);
}

#[test]
fn table_weight_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    std::fs::write(&path, "t,value\n# tabulated 3e^-t\n0.5,1.8195919791379003\n1,1.1036383235143269\n2,0.40600584970983811\n").unwrap();
    let spec = format!("table:{}", path.display());
    let v = json(&["covering", "--u", &spec, "--kmin", "-2"]);
    assert_eq!(v["config"]["u"], spec);
    assert!(v["result"]["validation"]["all_pass"].as_bool().unwrap());
}

#[test]
fn sweep_keeps_order() {
    let v = json(&["conditions", "--sweep", "p=1:3:0.5"]);
    let ps: Vec<f64> = v["reports"].as_array().unwrap().iter().map(|r| r["config"]["p"].as_f64().unwrap()).collect();
    assert_eq!(ps, [1.0, 1.5, 2.0, 2.5, 3.0]);
    assert_eq!(v["sweep"]["var"], "p");
    let (_, csv, _) = call(&["conditions", "--sweep", "r=1:2:1", "--format", "csv"]);
    assert!(csv.starts_with("r,family,name"));
}

#[test]
fn out_file_and_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, out, _) = call(&["covering", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let cfg: ProblemConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!(cfg.u, "exp:3,0,1");
    let again: ProblemConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn estimate_is_seeded() {
    let args = ["estimate", "--grid", "8,1e-2,1e2", "--restarts", "2", "--seed", "3"];
    assert_eq!(call(&args).1, call(&args).1);
    let v = json(&args);
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
}
