use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn spinel(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_spinel"))
        .args(args)
        .env_remove("SPINEL_PARAMS")
        .env_remove("SPINEL_THREADS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = spinel(args, b"");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let out = spinel(args, b"");
    assert_eq!(out.status.code(), Some(2), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn hash_of_empty_input_is_identity() {
    let mut expected = String::new();
    for i in 0..4 {
        for j in 0..4 {
            expected += if i == j { "01000000" } else { "00000000" };
        }
    }
    assert_eq!(ok(&["hash"]).trim(), expected);
    let raw = spinel(&["hash", "--format", "raw"], b"").stdout;
    assert_eq!(hex::encode(raw), expected);
}

#[test]
fn hash_file_matches_stdin() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("in");
    fs::write(&f, b"abc").unwrap();
    let via_stdin = spinel(&["hash"], b"abc").stdout;
    assert_eq!(ok(&["hash", p(&f)]).as_bytes(), via_stdin.as_slice());
    assert_ne!(ok(&["hash"]).as_bytes(), via_stdin.as_slice());
}

#[test]
fn params_f1() {
    let out = ok(&["analyze", "params", "--set", "F1"]);
    assert_eq!(
        out.lines().next().unwrap(),
        "sig=59072 pk=128 sk=256 cost=35325923"
    );
    let explicit = ok(&[
        "analyze", "params", "-H", "64", "-d", "8", "-b", "14", "-k", "22", "-w", "256",
    ]);
    assert_eq!(out, explicit);
    let csv = ok(&["analyze", "params", "--set", "f1", "--format", "csv"]);
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "64,8,14,22,256,59072,128,256,35325923,4325631"
    );
}

#[test]
fn params_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_spinel"))
        .args(["analyze", "params"])
        .env("SPINEL_PARAMS", "desk")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("sig=19904 "));
    assert!(err(&["analyze", "params"]).contains("no parameter set"));
}

#[test]
fn distinct_error_messages() {
    assert!(err(&["analyze", "params", "--set", "F11"]).contains("unknown parameter set \"F11\""));
    assert!(err(&["analyze", "params", "--set", "64,7,14,22,256"]).contains("must divide"));
    assert!(err(&["hash", "--format", "csv"]).contains("not supported by hash"));
    assert!(err(&["bench", "--set", "desk", "--runs", "2"]).contains("at least 3"));
    assert!(err(&["bench", "--set", "desk", "--op", "fly"]).contains("unknown benchmark operation"));
    assert!(err(&["analyze", "degrade", "--set", "F1", "--m-step", "0"]).contains("m range"));
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("sk");
    fs::write(&bad, [0u8; 100]).unwrap();
    let e = err(&["sign", "--set", "desk", "--sk", p(&bad), "--msg", p(&bad)]);
    assert!(e.contains("malformed secret key file"), "{e}");
}

#[test]
fn candidates_csv() {
    let csv = ok(&["analyze", "params", "--budget", "64", "--sigma", "128"]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h,d,b,k,w,sig_bytes,sign_cost_hashes,keygen_cost_hashes,sec_eff"
    );
    let costs: Vec<u64> = lines
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert!(!costs.is_empty());
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
    let none = ok(&["analyze", "params", "--budget", "64", "--sigma", "1000"]);
    assert_eq!(none.lines().count(), 1);
}

#[test]
fn degrade_csv_shape() {
    let csv = ok(&[
        "analyze", "degrade", "--set", "F1", "--m-min", "60", "--m-max", "64", "--m-step", "0.5",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,p,sec,delta_sec,sec_eff");
    assert_eq!(lines.len(), 1 + 9);
    assert!(lines[1].starts_with("60,"));
    let kv = ok(&[
        "analyze", "degrade", "--set", "F1", "--m-min", "64", "--m-max", "64", "--format", "kv",
    ]);
    assert!(kv.starts_with("m=64 p="));
}

#[test]
fn sign_verify_roundtrip_desk() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (entropy, sk, pk, msg, sig) = (
        d.join("e"),
        d.join("sk"),
        d.join("pk"),
        d.join("msg"),
        d.join("sig"),
    );
    fs::write(&entropy, (0..192).map(|i| i as u8).collect::<Vec<u8>>()).unwrap();
    fs::write(&msg, b"attack at dawn").unwrap();
    let kg = [
        "keygen",
        "--set",
        "desk",
        "--sk-out",
        p(&sk),
        "--pk-out",
        p(&pk),
        "--entropy",
        p(&entropy),
    ];
    ok(&kg);
    assert_eq!(fs::read(&sk).unwrap().len(), 256);
    assert_eq!(fs::read(&pk).unwrap().len(), 128);
    let first = fs::read(&pk).unwrap();
    ok(&kg);
    assert_eq!(fs::read(&pk).unwrap(), first);

    ok(&[
        "sign",
        "--set",
        "desk",
        "--sk",
        p(&sk),
        "--msg",
        p(&msg),
        "--out",
        p(&sig),
    ]);
    assert_eq!(fs::read(&sig).unwrap().len(), 19904);
    let verify = [
        "verify",
        "--set",
        "desk",
        "--pk",
        p(&pk),
        "--sig",
        p(&sig),
        "--msg",
        p(&msg),
    ];
    assert_eq!(ok(&verify), "result=accept\n");

    fs::write(&msg, b"attack at dusk").unwrap();
    let out = spinel(&verify, b"");
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(out.stdout, b"result=reject\n");
}

#[test]
fn hex_files_and_stdin_message() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sk, pk, sig) = (d.join("sk.hex"), d.join("pk.hex"), d.join("sig.hex"));
    let hexfmt = ["--format", "hex"];
    let mut kg = vec![
        "keygen",
        "--set",
        "desk",
        "--sk-out",
        p(&sk),
        "--pk-out",
        p(&pk),
    ];
    kg.extend(hexfmt);
    ok(&kg);
    assert_eq!(fs::read_to_string(&pk).unwrap().trim().len(), 256);
    let opt = "ab".repeat(64);
    let out = spinel(
        &[
            "sign",
            "--set",
            "desk",
            "--sk",
            p(&sk),
            "--format",
            "hex",
            "--opt-rand",
            &opt,
        ],
        b"from stdin",
    );
    assert!(out.status.success());
    fs::write(&sig, &out.stdout).unwrap();
    let verify = ["verify", "--set", "desk", "--pk", p(&pk), "--sig", p(&sig)];
    assert!(spinel(&verify, b"from stdin").status.success());
    assert_eq!(spinel(&verify, b"from stdout").status.code(), Some(1));
    let short = spinel(
        &[
            "sign",
            "--set",
            "desk",
            "--sk",
            p(&sk),
            "--opt-rand",
            "abcd",
        ],
        b"",
    );
    assert!(String::from_utf8_lossy(&short.stderr).contains("--opt-rand must be 64 bytes"));
}

#[test]
fn gen_sts_file_and_smoke_tests() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("streams.bin");
    let summary = ok(&[
        "gen-sts",
        "--count",
        "4",
        "--bits",
        "1000",
        "--out",
        p(&out),
    ]);
    assert_eq!(
        summary.trim(),
        "streams=4 bits_per_stream=1000 bytes=500 calls_per_stream=3"
    );
    let bytes = fs::read(&out).unwrap();
    assert_eq!(bytes.len(), 500);
    ok(&[
        "gen-sts",
        "--count",
        "4",
        "--bits",
        "1000",
        "--out",
        p(&out),
        "--threads",
        "1",
    ]);
    assert_eq!(fs::read(&out).unwrap(), bytes);
    let csv = ok(&[
        "gen-sts",
        "--count",
        "2",
        "--bits",
        "2000",
        "--id-offset",
        "7",
        "--out",
        p(&out),
        "--format",
        "csv",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "stream,ones,monobit_p,runs_p");
    assert!(lines[1].starts_with("7,") && lines[2].starts_with("8,"));
    assert!(err(&["gen-sts", "--count", "0", "--out", p(&out)]).contains("at least 1"));
}

#[test]
fn bench_reports_exact_counts() {
    let kv = ok(&[
        "bench", "--set", "desk", "--op", "keygen", "--op", "sign", "--runs", "3",
    ]);
    let lines: Vec<&str> = kv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("op=keygen params=8,2,4,8,16 runs=3 "));
    assert!(lines[0].contains(" thash_calls=33567 "));
    assert!(lines[1].contains(" thash_calls=67511 "));
    let csv = ok(&[
        "bench", "--set", "desk", "--op", "thash", "--runs", "3", "--format", "csv",
    ]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "op,h,d,b,k,w,runs,iters_per_run,median_ns,median_cycles,thash_calls,per_run_ns"
    );
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields.len(), 12);
    assert_eq!(
        &fields[..8],
        &["thash", "8", "2", "4", "8", "16", "3", "1000"]
    );
    assert_eq!(fields[11].split(';').count(), 3);
}
