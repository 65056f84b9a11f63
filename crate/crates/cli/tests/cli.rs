use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hyperrho(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperrho"))
        .args(args)
        .env("HYPERRHO_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn census_genus_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperrho(&["census", "--genus", "4", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["pass"], true);
    assert!(r.get("runtime").is_none());
    assert_eq!(check(&r, "census.parity")["observed"]["even"], 136);
    assert_eq!(check(&r, "census.parity")["observed"]["odd"], 120);
    let m = &check(&r, "census.multiplicity")["observed"];
    assert_eq!((m["m0"].clone(), m["m1"].clone(), m["m2"].clone()), (126.into(), 120.into(), 10.into()));
}

#[test]
fn goepel_uses_cache_on_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = json(&hyperrho(&["goepel", "--genus", "3", "--rank", "3"], dir.path()));
    let second = json(&hyperrho(&["goepel", "--genus", "3", "--rank", "3"], dir.path()));
    assert_eq!(first["runtime"]["cache"][0]["status"], "miss");
    assert_eq!(second["runtime"]["cache"][0]["status"], "hit");
    assert_eq!(first["checks"], second["checks"]);
    assert_eq!(second["pass"], true);
    assert_eq!(check(&second, "goepel.groups")["observed"], 135);
    assert_eq!(check(&second, "goepel.even_systems")["observed"]["1[I2]+7[I0]"], 30);
    assert_eq!(check(&second, "goepel.structure")["observed"]["witnesses"], 30);

    let off = json(&hyperrho(&["goepel", "--genus", "3", "--rank", "3", "--no-cache"], dir.path()));
    assert_eq!(off["runtime"]["cache"][0]["status"], "disabled");
}

#[test]
fn goepel_rank_two_collections() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperrho(&["goepel", "--genus", "3", "--rank", "2", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let c = &check(&r, "goepel.even_collections")["observed"];
    assert_eq!(c["3(4[I0])"], 210);
    assert_eq!(c["(1[I2]+3[I0])+2(4[I0])"], 105);
}

#[test]
fn identities_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["identities", "--genus", "3", "--trials", "1", "--seed", "11", "--deterministic", "--no-cache"];
    let a = hyperrho(&args, dir.path());
    let b = hyperrho(&args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    for name in ["identity.chi4", "identity.chi18", "identity.phi2_equal", "identity.I1_translation"] {
        let c = check(&r, name);
        assert_eq!(c["pass"], true, "{name}");
        assert_eq!(c["observed"]["exponents_match"], true);
        assert_eq!(c["observed"]["roots"].as_array().unwrap().len(), 1);
    }
    let other = hyperrho(
        &["identities", "--genus", "3", "--trials", "1", "--seed", "12", "--deterministic", "--no-cache"],
        dir.path(),
    );
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn numeric_genus_one_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let roots = dir.path().join("roots.txt");
    std::fs::write(&roots, "# elliptic\n-1\n0\n1/2\n7/3\n").unwrap();
    let out = hyperrho(&["numeric", "--roots", roots.to_str().unwrap(), "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["config"]["genus"], 1);
    assert_eq!(check(&r, "agm")["pass"], true);
    assert!(check(&r, "agm")["observed"].as_f64().unwrap() < 1e-10);
    assert_eq!(check(&r, "thomae.order1")["observed"]["normalized_epsilon"], 1.0);
}

#[test]
fn numeric_genus_three_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperrho(&["numeric", "--roots", "-3,-1,0,1/2,2,3,5,8", "--digits", "12", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["pass"], true);
    let v = check(&r, "vanishing");
    assert_eq!(v["observed"]["count"], 1);
    assert_eq!(v["observed"]["characteristics"], v["expected"]["characteristics"]);
    assert_eq!(check(&r, "thomae.order2")["observed"]["normalized_epsilon"], -1.0);
    for name in ["chi18", "chi4", "thomae.order3", "truncation", "periods.legendre"] {
        assert_eq!(check(&r, name)["pass"], true, "{name}");
    }
    let transforms = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("transform."))
        .count();
    assert_eq!(transforms, 14);
}

#[test]
fn numeric_selected_checks_only() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        hyperrho(&["numeric", "--roots", "0,1,3,4,6,9", "--checks", "thomae1,heat", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> =
        json(&out)["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names[0], "thomae.order1");
    assert!(names[1..].iter().all(|n| n == "heat"));
}

#[test]
fn report_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = hyperrho(&["report", "--out", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert!(r["runtime"]["wall_clock_ms"].is_u64());
    for name in ["census.parity", "goepel.structure", "identity.mu8", "agm", "chi68_partial", "chi18"] {
        assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == name), "{name}");
    }
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["census", "--genus", "5"][..],
        &["goepel", "--genus", "2", "--rank", "3"],
        &["identities", "--genus", "2"],
        &["identities", "--genus", "3", "--trials", "0"],
        &["numeric", "--roots", "0,2,1,3"],
        &["numeric", "--roots", "0,1,2"],
        &["numeric", "--roots", "0,1,2,x"],
        &["numeric", "--roots", "0,1,2,3", "--digits", "20"],
        &["numeric", "--roots", "0,1,2,3", "--checks", "nonsense"],
        &["report"],
    ] {
        let out = hyperrho(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn inapplicable_check_fails_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperrho(&["numeric", "--roots", "0,1,2,3,4,5,6,7", "--checks", "chi68", "--deterministic"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["pass"], false);
    assert!(check(&r, "chi68_partial")["observed"]["error"].is_string());
}
