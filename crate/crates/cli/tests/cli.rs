use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

fn grkex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grkex"))
        .args(args)
        .env_remove("GRKEX_SEED")
        .output()
        .expect("run grkex")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = grkex(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn fields(csv: &str) -> HashMap<String, String> {
    csv.lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grkex-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn demo_prints_matching_digests() {
    let out = ok(&["kex", "demo", "--seed", "42"]);
    let f = fields(&out);
    assert_eq!(f["alice_sha256"], f["bob_sha256"]);
    assert_eq!(f["alice_sha256"].len(), 64);
    assert_ne!(f["alice_public"], f["bob_public"]);
    // 3×3 over Z_7[S_5]: 10 header bytes and 405 payload bytes.
    assert_eq!(f["base"].len(), 2 * 415);
}

#[test]
fn demo_is_deterministic_and_prints_its_seed() {
    let a = grkex(&["kex", "demo", "--seed", "7", "--k", "2"]);
    let b = grkex(&["kex", "demo", "--seed", "7", "--k", "2"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("seed=7 n=7 m=5 k=2"));
    let c = grkex(&["kex", "demo", "--seed", "8", "--k", "2"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unseeded_runs_report_the_seed_they_used() {
    let o = grkex(&["kex", "demo", "--k", "2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let seed = v["seed"].as_u64().unwrap();
    assert!(stderr(&o).contains(&format!("seed={seed} ")));
    let again = ok(&[
        "kex",
        "demo",
        "--k",
        "2",
        "--format",
        "json",
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(again, stdout(&o));
}

#[test]
fn seed_flag_beats_environment() {
    let run = |env: &str, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_grkex"));
        cmd.args(["kex", "demo", "--k", "2"]).env("GRKEX_SEED", env);
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.output().unwrap().stdout
    };
    let from_env = run("11", None);
    assert_eq!(
        from_env,
        ok(&["kex", "demo", "--k", "2", "--seed", "11"]).into_bytes()
    );
    assert_eq!(
        run("11", Some("12")),
        ok(&["kex", "demo", "--k", "2", "--seed", "12"]).into_bytes()
    );
}

#[test]
fn separate_parties_agree() {
    let alice = fields(&ok(&["kex", "keygen", "--k", "2", "--seed", "1"]));
    let bob = fields(&ok(&[
        "kex",
        "keygen",
        "--k",
        "2",
        "--seed",
        "2",
        "--base",
        &alice["base"],
    ]));
    assert_eq!(alice["base"], bob["base"]);
    let again = fields(&ok(&[
        "kex",
        "pubkey",
        "--base",
        &bob["base"],
        "--private",
        &bob["private"],
    ]));
    assert_eq!(again["public"], bob["public"]);

    let dir = scratch("parties");
    let bob_pub = dir.join("bob.hex");
    std::fs::write(&bob_pub, &bob["public"]).unwrap();
    let a = fields(&ok(&[
        "kex",
        "shared",
        "--peer",
        bob_pub.to_str().unwrap(),
        "--private",
        &alice["private"],
    ]));
    let b = fields(&ok(&[
        "kex",
        "shared",
        "--peer",
        &alice["public"],
        "--private",
        &bob["private"],
    ]));
    assert_eq!(a["shared"], b["shared"]);
    assert_eq!(a["sha256"], b["sha256"]);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(grkex(&["kex", "demo", "--bogus"]).status.code(), Some(2));
    assert_eq!(grkex(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        grkex(&["kex", "demo", "--seed", "x"]).status.code(),
        Some(2)
    );
    let bad_key = grkex(&["kex", "shared", "--peer", "zz", "--private", "5"]);
    assert_eq!(bad_key.status.code(), Some(1));
    assert!(stderr(&bad_key).starts_with("error:"));
    let zero = grkex(&["kex", "demo", "--exp-lo", "0", "--seed", "1"]);
    assert_eq!(zero.status.code(), Some(1));
    let bad_ring = grkex(&["kex", "demo", "--m", "30", "--seed", "1"]);
    assert_eq!(bad_ring.status.code(), Some(1));
}

#[test]
fn bench_reports_mean_time() {
    let out = ok(&[
        "bench",
        "pow",
        "--k",
        "2",
        "--n",
        "7",
        "--exp-digits",
        "100",
        "--reps",
        "3",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["reps"], 3);
    assert!(v["mean_ms"].as_f64().unwrap() > 0.0);
    assert!(v["sd_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn support_probability() {
    let out = ok(&["support-prob", "--trials", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["exact"].as_f64().unwrap() - 0.945_220_203_086_297_8).abs() < 1e-15);
    assert!(v["sampled"].is_null());
}

#[test]
fn ddh_writes_tables() {
    let dir = scratch("ddh");
    let out_dir = dir.join("exp1");
    let args = [
        "ddh",
        "exp1",
        "--fast",
        "--trials",
        "100",
        "--seed",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    assert!(first.starts_with("experiment,batch,arm,statistic,dof,p_value,passed\n"));
    assert_eq!(first.lines().count(), 4);
    for name in [
        "freq_mab.csv",
        "freq_mc.csv",
        "qq_a11.csv",
        "qq_a22.csv",
        "params.json",
        "summary.csv",
    ] {
        assert!(out_dir.join(name).is_file(), "{name}");
    }
    let freq = std::fs::read_to_string(out_dir.join("freq_mab.csv")).unwrap();
    // Header plus 4 entries × 120 elements × 7 residues.
    assert_eq!(freq.lines().count(), 1 + 4 * 120 * 7);
    let qq = std::fs::read_to_string(out_dir.join("qq_a11.csv")).unwrap();
    assert_eq!(qq.lines().count(), 1 + 120 * 7);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn ddh_triples_and_uniformity() {
    let out = ok(&[
        "ddh",
        "exp3",
        "--fast",
        "--trials",
        "2000",
        "--batches",
        "2",
        "--seed",
        "4",
        "--format",
        "json",
    ]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["dof"], 342);
    let out = ok(&[
        "ddh",
        "exp2",
        "--fast",
        "--trials",
        "100",
        "--seed",
        "4",
        "--reference",
        "copy",
        "--format",
        "json",
    ]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows[0]["statistic"], rows[1]["statistic"]);
    assert_eq!(rows[2]["statistic"].as_f64(), Some(0.0));
}

#[test]
fn searches_emit_json_records() {
    let out = ok(&["bsgs", "--seed", "9", "--trials", "5", "--exp-hi", "500"]);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["found"], true);
        assert!(v["exponent"].as_u64().unwrap() <= v["planted"].as_u64().unwrap());
        assert_eq!(v["entries_stored"], 24);
    }
    let over = grkex(&["bsgs", "--seed", "9", "--exp-hi", "10000", "--budget", "10"]);
    assert_eq!(over.status.code(), Some(1));

    let out = ok(&[
        "orbit", "scan", "--n", "2", "--m", "3", "--k", "2", "--seed", "1", "--trials", "3",
    ]);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["found"], true);
        assert!(v["period"].as_u64().unwrap() >= 1);
        assert!(v.get("wall_ms").is_some());
    }
    let out = ok(&["orbit", "scan", "--k", "2", "--seed", "1", "--budget", "5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["found"], false);
    assert_eq!(v["multiplications_used"], 5);

    let out = ok(&["order", "--n", "2", "--m", "3", "--k", "2", "--seed", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["found"], true);
}

#[test]
fn challenge_check_and_roundtrip() {
    let o = grkex(&["challenge", "check"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: Ma and Mb are identical"));
    assert!(stdout(&o).contains("27,true,true,false"));

    let dir = scratch("challenge");
    ok(&["challenge", "roundtrip", "--out", dir.to_str().unwrap()]);
    let path = |f: &str| dir.join(f).to_str().unwrap().to_owned();
    let (m, ma, mb) = (path("M.txt"), path("Ma.txt"), path("Mb.txt"));
    let o = grkex(&["challenge", "check", "--m", &m, "--ma", &ma, "--mb", &mb]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("27,true,true,false"));

    let canonical = std::fs::read_to_string(&m).unwrap();
    let again = dir.join("again");
    ok(&[
        "challenge",
        "roundtrip",
        "--m",
        &m,
        "--ma",
        &m,
        "--mb",
        &mb,
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read_to_string(again.join("M.txt")).unwrap(),
        canonical
    );
    assert_eq!(
        std::fs::read_to_string(again.join("Ma.txt")).unwrap(),
        canonical
    );

    std::fs::write(dir.join("broken.txt"), "a_{11} = ε\n").unwrap();
    let broken = grkex(&["challenge", "check", "--m", &path("broken.txt")]);
    assert_eq!(broken.status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}
