use std::io::Write;
use std::process::{Command, Output, Stdio};

const PELL: &str = "\
field x^2-2 as s
pep vars m,n over s
  (-1)^(m) * (1/2) * (3-2s)^(n) + (-1)^(m) * (1/2) * (3+2s)^(n)
  (s/4) * (3-2s)^(n) - (s/4) * (3+2s)^(n)
end
";

fn pep(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pep"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_growth_tsv() {
    let o = pep(&["count-growth", "-", "--thresholds", "10^2,10^3,10^4"], Some(PELL));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().take(4).collect();
    assert_eq!(rows, ["H\tcount", "100\t14", "1000\t18", "10000\t22"]);
    assert!(out.contains("# slope_vs_log_h"));
}

#[test]
fn height_of_pair() {
    let o = pep(&["height", "--point", "3,-2", "--format", "json", "--no-timestamp"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let h = &v["result"]["heights"][0]["height"];
    let mid = 0.5 * (h["log_lo"].as_f64().unwrap() + h["log_hi"].as_f64().unwrap());
    assert!((mid - 3f64.ln()).abs() < 1e-9);
    assert!(v.get("generated_at").is_none());
}

#[test]
fn jordan_of_block() {
    let o = pep(&["jordan", "--matrix", "[[2,1],[0,2]]"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "part\tmatrix\nsemisimple\t[[2, 0], [0, 2]]\nunipotent\t[[1, 1/2], [0, 1]]\n");
}

#[test]
fn exit_codes() {
    let parse = pep(&["enumerate", "-"], Some("pep vars n over Q\n  2^(n/2)\nend\n"));
    assert_eq!(parse.status.code(), Some(2));
    let domain = pep(&["jordan", "--matrix", "[[0,0],[0,1]]"], None);
    assert_eq!(domain.status.code(), Some(3));
    let cap = pep(&["enumerate", "-", "--box", "100000"], Some(PELL));
    assert_eq!(cap.status.code(), Some(4));
    let json = pep(&["enumerate", "-", "--box", "100000", "--format", "json"], Some(PELL));
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["error"]["code"], "BoxTooLarge");
    assert_eq!(v["error"]["class"], "cap-exceeded");
    let unsupported = pep(&["evertse-scan", "-"], Some("field x^2-2 as s\nprimes 2, 3\n"));
    assert_eq!(unsupported.status.code(), Some(3));
    let missing = pep(&["enumerate", "/nonexistent/job.pep"], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["minimal", "-", "--box", "4", "--format", "json", "--no-timestamp"];
    let a = stdout(&pep(&args, Some(PELL)));
    let b = stdout(&pep(&args, Some(PELL)));
    assert_eq!(a, b);
    let stamped = stdout(&pep(&["minimal", "-", "--box", "4", "--format", "json"], Some(PELL)));
    let mut v: serde_json::Value = serde_json::from_str(&stamped).unwrap();
    assert!(v["generated_at"].is_u64());
    v.as_object_mut().unwrap().remove("generated_at");
    assert_eq!(v, serde_json::from_str::<serde_json::Value>(&a).unwrap());
}

#[test]
fn config_file_caps() {
    let dir = std::env::temp_dir().join(format!("pep-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("caps.toml");
    std::fs::write(&cfg, "max-cells = 10\n").unwrap();
    let o = pep(&["enumerate", "-", "--box", "3", "--config", cfg.to_str().unwrap()], Some(PELL));
    assert_eq!(o.status.code(), Some(4));
    let out = dir.join("values.tsv");
    let o = pep(&["enumerate", "-", "--box", "1", "--output", out.to_str().unwrap()], Some(PELL));
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("value\twitnesses\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bg_to_pep_then_enumerate() {
    let o = pep(&["bg-to-pep", "--field", "x^2-2 as s", "--matrix", "[[3,4],[2,3]]"], None);
    assert_eq!(o.status.code(), Some(0));
    let job = stdout(&o);
    let e = pep(&["enumerate", "-", "--box", "1"], Some(&job));
    assert_eq!(e.status.code(), Some(0));
    let out = stdout(&e);
    assert!(out.contains("(3, 4, 2, 3)\t(1)"), "{out}");
    assert!(out.contains("(3, -4, -2, 3)\t(-1)"), "{out}");
}

#[test]
fn sl2_and_degeneracy() {
    let o = pep(&["sl2-count", "--thresholds", "1,2,3"], None);
    assert_eq!(stdout(&o).lines().take(4).collect::<Vec<_>>(), ["H\tcount", "1\t20", "2\t52", "3\t116"]);
    let job = "pep vars a,b over Q\n  1 + 2^(a) - 2^(b)\nend\n";
    let o = pep(&["degeneracy", "-", "--box", "6"], Some(job));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("[0, 0]\t[1, 1]"), "{out}");
    assert!(out.contains("[0, 0]\t[1, 0]"), "{out}");
}
