use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rdhet::io;

const SENTENCE: &str = "Joe waited for the train, but the train was late.";

fn rdhet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdhet"))
        .args(args)
        .output()
        .expect("failed to run rdhet")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn assert_status(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// keygen + encrypt of `text` at `bits`; returns (dir, pub, priv, ct).
fn setup(bits: &str, text: &str) -> (tempfile::TempDir, String, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let (pk, sk, txt, ct) = (
        path(dir.path(), "k.pub"),
        path(dir.path(), "k.priv"),
        path(dir.path(), "t.txt"),
        path(dir.path(), "t.ct"),
    );
    fs::write(&txt, text).unwrap();
    assert_status(
        &rdhet(&[
            "--seed", "1", "keygen", "--bits", bits, "--pub", &pk, "--priv", &sk,
        ]),
        0,
    );
    assert_status(
        &rdhet(&[
            "--seed", "2", "encrypt", "--key", &pk, "--input", &txt, "--output", &ct,
        ]),
        0,
    );
    (dir, pk, sk, ct)
}

#[test]
fn full_pipeline_raw_mode() {
    let (dir, pk, sk, ct) = setup("512", SENTENCE);
    let seq = io::read_cipher_file(fs::File::open(&ct).unwrap()).unwrap();
    assert_eq!(seq.seq.len(), 49);

    let secret = path(dir.path(), "s.bin");
    // 49 bits: six full bytes plus one bit of a seventh.
    fs::write(&secret, [0xde, 0xad, 0xbe, 0xef, 0x01, 0x23, 0x80]).unwrap();
    let marked = path(dir.path(), "m.ct");
    let out = rdhet(&[
        "embed", "--key", &pk, "--cover", &ct, "--secret", &secret, "--tau", "00ff", "--count",
        "49", "--output", &marked,
    ]);
    assert_status(&out, 0);

    let extracted = path(dir.path(), "x.bin");
    let out = rdhet(&[
        "extract", "--input", &marked, "--tau", "00ff", "--raw", "--count", "49", "--output",
        &extracted,
    ]);
    assert_status(&out, 0);
    assert_eq!(
        fs::read(&extracted).unwrap(),
        [0xde, 0xad, 0xbe, 0xef, 0x01, 0x23, 0x80]
    );

    for input in [&ct, &marked] {
        let recovered = path(dir.path(), "r.txt");
        assert_status(
            &rdhet(&[
                "recover", "--key", &sk, "--input", input, "--output", &recovered,
            ]),
            0,
        );
        assert_eq!(fs::read_to_string(&recovered).unwrap(), SENTENCE);
    }
}

#[test]
fn framed_mode_needs_no_count() {
    let (dir, pk, _, ct) = setup("256", SENTENCE);
    let secret = path(dir.path(), "s.bin");
    fs::write(&secret, [0b1100_1010, 0b0101_0101, 0b1000_0000]).unwrap();
    let marked = path(dir.path(), "m.ct");
    let out = rdhet(&[
        "embed", "--key", &pk, "--cover", &ct, "--secret", &secret, "--tau", "abcd", "--framed",
        "--count", "17", "--output", &marked,
    ]);
    assert_status(&out, 0);
    let extracted = path(dir.path(), "x.bin");
    let out = rdhet(&[
        "extract", "--input", &marked, "--tau", "abcd", "--framed", "--output", &extracted,
    ]);
    assert_status(&out, 0);
    assert_eq!(
        fs::read(&extracted).unwrap(),
        [0b1100_1010, 0b0101_0101, 0b1000_0000]
    );
}

#[test]
fn tau_file_matches_hex_tau() {
    let (dir, pk, _, ct) = setup("256", "tau file cover text");
    let secret = path(dir.path(), "s.bin");
    fs::write(&secret, b"hi").unwrap();
    let tau_file = path(dir.path(), "tau.bin");
    fs::write(&tau_file, [0x01, 0x02]).unwrap();
    let marked = path(dir.path(), "m.ct");
    assert_status(
        &rdhet(&[
            "embed",
            "--key",
            &pk,
            "--cover",
            &ct,
            "--secret",
            &secret,
            "--tau-file",
            &tau_file,
            "--output",
            &marked,
        ]),
        0,
    );
    let extracted = path(dir.path(), "x.bin");
    assert_status(
        &rdhet(&[
            "extract", "--input", &marked, "--tau", "0102", "--count", "16", "--output", &extracted,
        ]),
        0,
    );
    assert_eq!(fs::read(&extracted).unwrap(), b"hi");
}

#[test]
fn wrong_tau_yields_garbage() {
    let (dir, pk, _, ct) = setup("256", rdhet::bench::DEFAULT_TEXTS[1]);
    let secret = path(dir.path(), "s.bin");
    fs::write(&secret, b"secret!!").unwrap();
    let marked = path(dir.path(), "m.ct");
    assert_status(
        &rdhet(&[
            "embed", "--key", &pk, "--cover", &ct, "--secret", &secret, "--tau", "11", "--output",
            &marked,
        ]),
        0,
    );
    let extracted = path(dir.path(), "x.bin");
    assert_status(
        &rdhet(&[
            "extract", "--input", &marked, "--tau", "12", "--count", "64", "--output", &extracted,
        ]),
        0,
    );
    assert_ne!(fs::read(&extracted).unwrap(), b"secret!!");
}

#[test]
fn capacity_exceeded_reports_counts() {
    let (dir, pk, _, ct) = setup("256", SENTENCE);
    let secret = path(dir.path(), "s.bin");
    fs::write(&secret, [0u8; 7]).unwrap();
    let marked = path(dir.path(), "m.ct");
    let out = rdhet(&[
        "embed", "--key", &pk, "--cover", &ct, "--secret", &secret, "--tau", "00", "--count", "50",
        "--output", &marked,
    ]);
    assert_status(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("50") && stderr.contains("49"), "{stderr}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x");
    // Raw extraction without --count.
    assert_status(
        &rdhet(&[
            "extract",
            "--input",
            &fixture("hi.marked"),
            "--tau",
            "00",
            "--output",
            &out,
        ]),
        1,
    );
    // Missing required argument.
    assert_status(&rdhet(&["encrypt", "--key", "k"]), 1);
    // Conflicting framing flags.
    assert_status(
        &rdhet(&[
            "extract", "--input", "m", "--tau", "00", "--raw", "--framed", "--output", &out,
        ]),
        1,
    );
    assert_status(
        &rdhet(&[
            "extract", "--input", "m", "--tau", "zz", "--count", "1", "--output", &out,
        ]),
        1,
    );
    assert_status(&rdhet(&["--help"]), 0);
}

#[test]
fn protocol_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (p, s) = (path(dir.path(), "p"), path(dir.path(), "s"));
    assert_status(
        &rdhet(&["keygen", "--bits", "15", "--pub", &p, "--priv", &s]),
        2,
    );
    assert!(!Path::new(&p).exists());

    // Toy N = 35 cannot encrypt bytes.
    let toy = path(dir.path(), "toy.pub");
    fs::write(&toy, "RDHET-PUBKEY v1\nbits=6\nN=23\ng=24\n").unwrap();
    let txt = path(dir.path(), "t.txt");
    fs::write(&txt, "A").unwrap();
    let out = rdhet(&[
        "encrypt",
        "--key",
        &toy,
        "--input",
        &txt,
        "--output",
        &path(dir.path(), "c"),
    ]);
    assert_status(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("255"));

    // Missing input file.
    assert_status(
        &rdhet(&[
            "recover",
            "--key",
            &fixture("toy.priv"),
            "--input",
            "/nonexistent",
            "--output",
            &p,
        ]),
        2,
    );
}

#[test]
fn recover_with_mismatched_key_fails() {
    let (dir, _, _, ct) = setup("256", "mismatch");
    let out = rdhet(&[
        "recover",
        "--key",
        &fixture("toy.priv"),
        "--input",
        &ct,
        "--output",
        &path(dir.path(), "r"),
    ]);
    assert_status(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("modulus"));
}

#[test]
fn empty_text_encrypts_to_empty_file() {
    let (_dir, _, _, ct) = setup("256", "");
    assert_eq!(
        fs::read_to_string(&ct).unwrap().lines().nth(2).unwrap(),
        "count=0"
    );
}

#[test]
fn keygen_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (p, s) = (path(dir.path(), "p"), path(dir.path(), "s"));
    assert_status(
        &rdhet(&[
            "--seed", "5", "keygen", "--bits", "512", "--pub", &p, "--priv", &s,
        ]),
        0,
    );
    let pk = io::read_public_key(fs::File::open(&p).unwrap()).unwrap();
    let sk = io::read_private_key(fs::File::open(&s).unwrap()).unwrap();
    assert_eq!(pk.n().bits(), 512);
    let m = num_bigint::BigUint::from(123u32);
    let c = pk.encrypt(&m, &num_bigint::BigUint::from(7u32)).unwrap();
    assert_eq!(sk.decrypt(&c).unwrap(), m);

    // Same seed, same files.
    let (p2, s2) = (path(dir.path(), "p2"), path(dir.path(), "s2"));
    assert_status(
        &rdhet(&[
            "--seed", "5", "keygen", "--bits", "512", "--pub", &p2, "--priv", &s2,
        ]),
        0,
    );
    assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
    assert_eq!(fs::read(&s).unwrap(), fs::read(&s2).unwrap());
}

#[test]
fn bench_csv_output() {
    let out = rdhet(&[
        "--seed", "3", "bench", "--bits", "512", "--text", "AB", "--reps", "1", "--format", "csv",
    ]);
    assert_status(&out, 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("key_bits,text,size_bytes,er_bpb,t_keygen,t_enc,t_emb,t_dec"));
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..4], &["512", "AB", "2", "1"]);
    for t in &fields[4..8] {
        assert!(t.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn bench_rejects_zero_reps() {
    assert_status(
        &rdhet(&["bench", "--bits", "512", "--text", "AB", "--reps", "0"]),
        1,
    );
}
