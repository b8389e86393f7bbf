//! Reproducible statistical experiments emitting CSV tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{length_histogram, position_composites};
use crate::attacks::cpa::{scan_xor_positions, FULL_IMAGE_COUNT};
use crate::attacks::{craft_cpa_images, p_b_collision, ECONOMY_OFFSETS};
use crate::audit::probability_y0_zero;
use crate::cipher::{derive_global_seed, process_images_with, Direction};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::image::RgbImage;
use crate::key::SecretKey;

/// Upper limit on keys per experiment.
pub const MAX_TRIALS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    LenDist,
    PsCurve,
    PbCurve,
    RnCurve,
    XorEqCount,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::LenDist,
        ExperimentKind::PsCurve,
        ExperimentKind::PbCurve,
        ExperimentKind::RnCurve,
        ExperimentKind::XorEqCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LenDist => "len-dist",
            ExperimentKind::PsCurve => "ps-curve",
            ExperimentKind::PbCurve => "pb-curve",
            ExperimentKind::RnCurve => "rn-curve",
            ExperimentKind::XorEqCount => "xor-eq-count",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyPolicy {
    Fixed(SecretKey),
    /// Keys from a ChaCha8 generator; keys with `X0 = 0` are skipped.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImageSource {
    Provided(RgbImage),
    /// Seeded noise.
    Generated { width: usize, height: usize, seed: u64 },
}

impl ImageSource {
    pub fn image(&self) -> Result<RgbImage> {
        match self {
            ImageSource::Provided(img) => Ok(img.clone()),
            ImageSource::Generated { width, height, seed } => RgbImage::noise(*width, *height, *seed),
        }
    }

    fn describe(&self) -> String {
        match self {
            ImageSource::Provided(img) => format!("provided {}x{}", img.width(), img.height()),
            ImageSource::Generated { width, height, seed } => format!("noise {width}x{height} seed={seed}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Number of keys; ignored by the closed-form curves.
    pub trials: u64,
    pub key: KeyPolicy,
    /// Replaces `K10` of every key when set.
    pub k10: Option<u8>,
    pub image: ImageSource,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, key: KeyPolicy, image: ImageSource) -> Self {
        ExperimentSpec {
            kind,
            trials: 1,
            key,
            k10: None,
            image,
        }
    }

    /// The keys the experiment runs on, in order.
    pub fn keys(&self) -> Result<Vec<SecretKey>> {
        if self.trials == 0 {
            return Err(Error::OutOfRange("trials must be at least 1".into()));
        }
        if self.trials > MAX_TRIALS {
            return Err(Error::BudgetExceeded {
                requested: self.trials,
                cap: MAX_TRIALS,
            });
        }
        let fix = |k: SecretKey| self.k10.map_or(k, |v| k.with_k(10, v));
        match &self.key {
            KeyPolicy::Fixed(k) => Ok(vec![fix(*k); self.trials as usize]),
            KeyPolicy::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut keys = Vec::with_capacity(self.trials as usize);
                while keys.len() < self.trials as usize {
                    let k = fix(SecretKey::random(&mut rng));
                    if derive_global_seed(&k).is_ok() {
                        keys.push(k);
                    }
                }
                Ok(keys)
            }
        }
    }

    fn describe(&self, keys: &[SecretKey]) -> String {
        let policy = match &self.key {
            KeyPolicy::Fixed(_) => "fixed".to_string(),
            KeyPolicy::Random { seed } => format!("random seed={seed}"),
        };
        let keys: Vec<String> = keys.iter().map(SecretKey::to_hex).collect();
        format!(
            "experiment={} trials={} key={} keys={} image={}",
            self.kind,
            self.trials,
            policy,
            keys.join(";"),
            self.image.describe()
        )
    }
}

/// A CSV table with a leading `#` comment line.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.comment);
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

/// Step-1 detections for one key, by number of chosen images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnCurve {
    /// `detections[n]`: positions passing with images `0..=n`.
    pub detections: Vec<usize>,
    /// Positions passing with the 13-image economy set.
    pub economy: usize,
}

impl RnCurve {
    /// `N(127) / N(n)`; `None` when nothing is detected.
    pub fn r(&self, n: usize) -> Option<f64> {
        ratio(self.detections[FULL_IMAGE_COUNT - 1], self.detections[n])
    }

    pub fn r_economy(&self) -> Option<f64> {
        ratio(self.detections[FULL_IMAGE_COUNT - 1], self.economy)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Runs step 1 of the chosen-plaintext attack on `base ^ 0..127` and counts
/// detections for every prefix of the image set and for the economy set.
pub fn rn_curve(key: &SecretKey, base: &RgbImage, exec: Exec) -> Result<RnCurve> {
    let plains = craft_cpa_images(base, FULL_IMAGE_COUNT)?;
    let ciphers = process_images_with(&plains, key, Direction::Encrypt, exec)?;
    let pairs: Vec<(RgbImage, RgbImage)> = plains.into_iter().zip(ciphers).collect();
    let scan = scan_xor_positions(&pairs, exec)?;
    let detections = (1..=FULL_IMAGE_COUNT).map(|n| scan.detections_with(n)).collect();
    let economy_pairs: Vec<(RgbImage, RgbImage)> =
        ECONOMY_OFFSETS.iter().map(|&l| pairs[usize::from(l)].clone()).collect();
    let economy = scan_xor_positions(&economy_pairs, exec)?.flagged_count();
    Ok(RnCurve { detections, economy })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

pub fn run_experiment(spec: &ExperimentSpec, exec: Exec) -> Result<Table> {
    match spec.kind {
        ExperimentKind::PsCurve => {
            let mut rows = Vec::with_capacity(625);
            for m in 0..25u32 {
                for n in 0..25u32 {
                    let p = probability_y0_zero(m, n);
                    rows.push(vec![(25 * m + n).to_string(), m.to_string(), n.to_string(), format!("{p:e}")]);
                }
            }
            Ok(Table {
                comment: "experiment=ps-curve closed form".into(),
                columns: vec!["index", "m", "n", "p_s"],
                rows,
            })
        }
        ExperimentKind::PbCurve => Ok(Table {
            comment: "experiment=pb-curve closed form".into(),
            columns: vec!["m", "p_b"],
            rows: (0..=24u32).map(|m| vec![m.to_string(), format!("{:e}", p_b_collision(m))]).collect(),
        }),
        ExperimentKind::LenDist => {
            let keys = spec.keys()?;
            let img = spec.image.image()?;
            let mut total = vec![0u64; 256];
            for k in &keys {
                let fs = position_composites(k, img.width(), img.height(), exec)?;
                for (len, count) in length_histogram(&fs, k.k10()).into_iter().enumerate() {
                    total[len] += count;
                }
            }
            let last = total.iter().rposition(|&c| c > 0).unwrap_or(0);
            let sum: u64 = total.iter().sum();
            let rows = total[..=last]
                .iter()
                .enumerate()
                .map(|(len, &c)| vec![len.to_string(), c.to_string(), format!("{:.6}", c as f64 / sum as f64)])
                .collect();
            Ok(Table {
                comment: spec.describe(&keys),
                columns: vec!["len", "count", "fraction"],
                rows,
            })
        }
        ExperimentKind::RnCurve => {
            let keys = spec.keys()?;
            let img = spec.image.image()?;
            let mut rows = Vec::new();
            for (t, k) in keys.iter().enumerate() {
                let curve = rn_curve(k, &img, exec)?;
                for (n, &d) in curve.detections.iter().enumerate() {
                    rows.push(vec![t.to_string(), "prefix".into(), n.to_string(), d.to_string(), fmt_opt(curve.r(n))]);
                }
                rows.push(vec![
                    t.to_string(),
                    "economy".into(),
                    (ECONOMY_OFFSETS.len() - 1).to_string(),
                    curve.economy.to_string(),
                    fmt_opt(curve.r_economy()),
                ]);
            }
            Ok(Table {
                comment: spec.describe(&keys),
                columns: vec!["trial", "set", "n", "detections", "r"],
                rows,
            })
        }
        ExperimentKind::XorEqCount => {
            let keys = spec.keys()?;
            let img = spec.image.image()?;
            let mut rows = Vec::new();
            for (t, k) in keys.iter().enumerate() {
                let fs = position_composites(k, img.width(), img.height(), exec)?;
                for c in 0..3 {
                    let xor: Vec<bool> = exec.map(&fs, |f| f[c].xor_constant().is_some());
                    let with_add = fs.iter().zip(&xor).filter(|(f, &x)| x && f[c].has_add()).count();
                    rows.push(vec![
                        t.to_string(),
                        k.k10().to_string(),
                        ["R", "G", "B"][c].into(),
                        xor.iter().filter(|&&x| x).count().to_string(),
                        with_add.to_string(),
                        fs.len().to_string(),
                    ]);
                }
            }
            Ok(Table {
                comment: spec.describe(&keys),
                columns: vec!["trial", "k10", "channel", "xor_equivalent", "with_add", "positions"],
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generated(size: usize) -> ImageSource {
        ImageSource::Generated {
            width: size,
            height: size,
            seed: 1,
        }
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn closed_form_curves() {
        let spec = ExperimentSpec::new(ExperimentKind::PsCurve, KeyPolicy::Random { seed: 0 }, generated(4));
        let t = run_experiment(&spec, Exec::Sequential).unwrap();
        assert_eq!(t.rows.len(), 625);
        assert_eq!(t.rows[25 * 12 + 12][3].parse::<f64>().unwrap(), 2f64.powi(-24));
        let spec = ExperimentSpec { kind: ExperimentKind::PbCurve, ..spec };
        let t = run_experiment(&spec, Exec::Sequential).unwrap();
        assert_eq!(t.rows.len(), 25);
        assert_eq!(t.rows[12][1].parse::<f64>().unwrap(), p_b_collision(12));
        assert!(t.to_csv().starts_with("# experiment=pb-curve"));
    }

    #[test]
    fn random_keys_are_reproducible() {
        let mut spec = ExperimentSpec::new(ExperimentKind::LenDist, KeyPolicy::Random { seed: 9 }, generated(8));
        spec.trials = 4;
        spec.k10 = Some(7);
        let a = spec.keys().unwrap();
        assert_eq!(a, spec.keys().unwrap());
        assert!(a.iter().all(|k| k.k10() == 7));
        let t = run_experiment(&spec, Exec::Parallel).unwrap();
        assert!(t.comment.contains(&a[0].to_hex()));
        assert!(t.comment.contains("seed=9"));
        let total: u64 = t.rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
        assert_eq!(total, 4 * 64 * 3);
        assert_eq!(run_experiment(&spec, Exec::Sequential).unwrap(), t);
    }

    #[test]
    fn trial_budget() {
        let mut spec = ExperimentSpec::new(ExperimentKind::XorEqCount, KeyPolicy::Random { seed: 9 }, generated(8));
        spec.trials = MAX_TRIALS + 1;
        assert!(matches!(run_experiment(&spec, Exec::Sequential), Err(Error::BudgetExceeded { .. })));
        spec.trials = 0;
        assert!(run_experiment(&spec, Exec::Sequential).is_err());
    }

    #[test]
    fn xor_counts_and_rn_curve() {
        let key: SecretKey = "8DB87A1613D75ADF2D06".parse().unwrap();
        let spec = ExperimentSpec::new(ExperimentKind::XorEqCount, KeyPolicy::Fixed(key), generated(16));
        let t = run_experiment(&spec, Exec::Parallel).unwrap();
        assert_eq!(t.rows.len(), 3);
        let curve = rn_curve(&key, &RgbImage::noise(16, 16, 1).unwrap(), Exec::Parallel).unwrap();
        let xor_total: usize = t.rows.iter().map(|r| r[3].parse::<usize>().unwrap()).sum();
        assert_eq!(curve.detections[127], xor_total);
        assert!(curve.detections.windows(2).all(|w| w[0] >= w[1]));
        assert!(curve.economy >= curve.detections[127]);
        let spec = ExperimentSpec { kind: ExperimentKind::RnCurve, ..spec };
        assert_eq!(run_experiment(&spec, Exec::Parallel).unwrap().rows.len(), 129);
    }
}
