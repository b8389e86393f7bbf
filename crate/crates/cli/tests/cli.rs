use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use imgcrypt::ppm::save_ppm;
use imgcrypt::RgbImage;
use tempfile::tempdir;

fn imgcrypt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imgcrypt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_noise(path: &Path, w: usize, h: usize) {
    fs::write(path, save_ppm(&RgbImage::noise(w, h, 3).unwrap())).unwrap();
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn encrypt_decrypt_roundtrip_is_byte_exact() {
    let dir = tempdir().unwrap();
    let (plain, enc, dec) = (dir.path().join("p.ppm"), dir.path().join("e.ppm"), dir.path().join("d.ppm"));
    write_noise(&plain, 32, 16);
    let key = "2A84BCF25E6A664E4C41";
    assert!(imgcrypt(&["encrypt", "--key", key, "--in", p(&plain), "--out", p(&enc)]).status.success());
    assert_ne!(fs::read(&plain).unwrap(), fs::read(&enc).unwrap());
    assert!(imgcrypt(&["decrypt", "--key", key, "--in", p(&enc), "--out", p(&dec)]).status.success());
    assert_eq!(fs::read(&plain).unwrap(), fs::read(&dec).unwrap());
}

#[test]
fn sequential_flag_gives_identical_output() {
    let dir = tempdir().unwrap();
    let (plain, a, b) = (dir.path().join("p.ppm"), dir.path().join("a.ppm"), dir.path().join("b.ppm"));
    write_noise(&plain, 16, 16);
    let key = "8DB87A1613D75ADF2D06";
    assert!(imgcrypt(&["encrypt", "--key", key, "--in", p(&plain), "--out", p(&a)]).status.success());
    assert!(imgcrypt(&["--sequential", "encrypt", "--key", key, "--in", p(&plain), "--out", p(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempdir().unwrap();
    let (good, odd, out) = (dir.path().join("g.ppm"), dir.path().join("o.ppm"), dir.path().join("x.ppm"));
    write_noise(&good, 4, 4);
    write_noise(&odd, 5, 5);

    let bad_key = imgcrypt(&["encrypt", "--key", "XYZ", "--in", p(&good), "--out", p(&out)]);
    assert_eq!(bad_key.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&bad_key.stderr).lines().count(), 1);

    let zero = imgcrypt(&["encrypt", "--key", "00000000000000000000", "--in", p(&good), "--out", p(&out)]);
    assert_eq!(zero.status.code(), Some(4));

    let bad_dims = imgcrypt(&["encrypt", "--key", "8DB87A1613D75ADF2D06", "--in", p(&odd), "--out", p(&out)]);
    assert_eq!(bad_dims.status.code(), Some(3));

    let missing = dir.path().join("missing.ppm");
    let no_file = imgcrypt(&["encrypt", "--key", "8DB87A1613D75ADF2D06", "--in", p(&missing), "--out", p(&out)]);
    assert_eq!(no_file.status.code(), Some(3));

    fs::write(dir.path().join("junk.ppm"), b"P3\n1 1\n255\n0 0 0\n").unwrap();
    let junk = imgcrypt(&["decrypt", "--key", "8DB87A1613D75ADF2D06", "--in", p(&dir.path().join("junk.ppm")), "--out", p(&out)]);
    assert_eq!(junk.status.code(), Some(3));
}

#[test]
fn audit_reports() {
    let weak = imgcrypt(&["audit", "--key", "3C1DE8FF0151FF012840"]);
    assert!(weak.status.success());
    let text = stdout(&weak);
    assert!(text.contains("leak_red = true"));
    assert!(text.contains("k10_period = 4"));

    let dir = tempdir().unwrap();
    let csv = dir.path().join("audit.csv");
    let eq = imgcrypt(&["audit", "--key", "1A93DF25CF78DC44E160", "--csv", p(&csv)]);
    assert!(stdout(&eq).contains("1A93DF25CF785CC4E160"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert!(rows.lines().nth(1).unwrap().contains("1A93DF25CF785CC4E160"));

    let generic = stdout(&imgcrypt(&["audit", "--key", "2A84BCF25E6A664E4C41"]));
    assert!(generic.contains("leak_red = false"));
    assert!(generic.contains("invalid_x0 = false"));
    assert!(generic.contains("k10_short_period = false"));
}

#[test]
fn k10_probe_on_small_probe() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    // K10 = 0 leaves the probe unchanged, so every block collides.
    let out = imgcrypt(&["attack", "k10-probe", "--key", "2A84BCF35D70664E4700", "--size", "16", "--csv", p(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("k10_candidates = 0"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("# attack=k10-probe"));
    assert_eq!(rows.lines().count(), 2 + 120);
}

#[test]
fn cpa_finds_small_k10_fragment() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("cpa.csv");
    let out = imgcrypt(&["attack", "cpa", "--key", "2A84BCF25E6A664E4C05", "--size", "128", "--csv", p(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("true_fragment_found = true"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.lines().nth(1).unwrap().starts_with("k4,"));
    assert!(rows.contains("114,94,106,102,78,76,5"));
}

#[test]
fn kpa_writes_recovered_image() {
    let dir = tempdir().unwrap();
    let (out_img, csv) = (dir.path().join("r.ppm"), dir.path().join("kpa.csv"));
    let out = imgcrypt(&[
        "attack", "kpa", "--key", "8DB87A1613D75ADF2D06", "--size", "32", "--out", p(&out_img), "--csv", p(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read(&out_img).unwrap().starts_with(b"P6\n32 32\n255\n"));
    let row = fs::read_to_string(&csv).unwrap().lines().nth(2).unwrap().to_string();
    let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[1], 3.0 * 1024.0);
    assert!(fields[2] >= fields[3]);
}

#[test]
fn first_block_search_and_budget() {
    let out = imgcrypt(&["attack", "first-block", "--key", "8DB87A1613D75ADF2D06", "--k10", "5,6,7", "--k10-grid-bits", "6"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("# attack=first-block"));
    let over = imgcrypt(&["attack", "first-block", "--key", "8DB87A1613D75ADF2D06", "--k10-grid-bits", "20", "--trials", "1000"]);
    assert_eq!(over.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&over.stderr).contains("cap"));
}

#[test]
fn stats_tables() {
    let ps = stdout(&imgcrypt(&["stats", "ps-curve"]));
    assert_eq!(ps.lines().count(), 2 + 625);
    let pb = stdout(&imgcrypt(&["stats", "pb-curve"]));
    assert_eq!(pb.lines().count(), 2 + 25);

    let dir = tempdir().unwrap();
    let csv = dir.path().join("len.csv");
    let len = imgcrypt(&["stats", "len-dist", "--seed", "5", "--trials", "2", "--k10", "9", "--size", "16", "--csv", p(&csv)]);
    assert!(len.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# experiment=len-dist"));
    assert!(text.contains("seed=5"));
    let again = dir.path().join("len2.csv");
    imgcrypt(&["stats", "len-dist", "--seed", "5", "--trials", "2", "--k10", "9", "--size", "16", "--csv", p(&again)]);
    assert_eq!(text, fs::read_to_string(&again).unwrap());

    let xor = stdout(&imgcrypt(&["stats", "xor-eq-count", "--key", "8DB87A1613D75ADF2D06", "--size", "16"]));
    assert_eq!(xor.lines().count(), 2 + 3);

    let unknown = imgcrypt(&["stats", "nope"]);
    assert!(!unknown.status.success());
    let budget = imgcrypt(&["stats", "len-dist", "--trials", "100000"]);
    assert!(!budget.status.success());
}
