//! Experiment manifests, the batch runner, and the fast selfcheck suite.
//!
//! A manifest is a JSON document naming a task, a model, window sizes, seeds
//! (either a list or a master seed plus count), and output paths. Runs are
//! deterministic: artifacts embed the manifest hash and contain no
//! timestamps, so re-running a manifest reproduces every output byte for
//! byte.

use crate::bipolar::{
    interface_path, sample_finite_walk, sample_wooded_walk, schnyder_from_bipolar,
    sew_bipolar_finite, verify_bar_q, verify_lr, wooded_round_trip,
};
use crate::coupling::{build_coupled_paths, check_event_en};
use crate::exponent::{
    ball_exponent_bounds, chi_bounds, estimate_ball_exponent, estimate_diameter_exponent,
    exponent_table, watabiki, ExpModel,
};
use crate::io::fnv1a;
use crate::kreweras::{extract_walk_kreweras, sew_kreweras, verify_prop6};
use crate::mullin::{extract_walk, sew_mullin, verify_prop_tri};
use crate::rng::StreamRng;
use crate::structure::{sweep_matches_brute_force, Variant};
use crate::walk::{
    bridge_couple, correlation_from_gamma, gamma_from_correlation, make_distribution, sample_walk,
    Model, Window,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    /// One of: verify, couple, exponent-ball, exponent-diam, selfcheck.
    pub task: String,
    /// mullin | uipt | bipolar | bipolar-tri | schnyder | mated-crt |
    /// lattice | path. Verify tasks allow "all".
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub n: Option<i64>,
    #[serde(default)]
    pub n_grid: Option<Vec<i64>>,
    #[serde(default)]
    pub radii: Option<Vec<u32>>,
    #[serde(default)]
    pub mesh: Option<u32>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub seed_count: Option<usize>,
    #[serde(default)]
    pub band_margin: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentManifest {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Canonical fingerprint embedded in all outputs.
    pub fn hash(&self) -> u64 {
        fnv1a(serde_json::to_string(self).expect("manifest serializes").as_bytes())
    }

    /// Explicit seed list, or `master_seed..master_seed+count`. A missing
    /// master seed defaults to 0 (logged by the runner).
    pub fn seed_list(&self) -> (Vec<u64>, bool) {
        if let Some(s) = &self.seeds {
            return (s.clone(), false);
        }
        let master = self.master_seed.unwrap_or(0);
        let count = self.seed_count.unwrap_or(10);
        ((master..master + count as u64).collect(), self.master_seed.is_none())
    }
}

/// One output artifact: a file name, its content, and the content hash.
#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub name: String,
    pub fnv: u64,
    #[serde(skip)]
    pub content: Vec<u8>,
}

#[derive(Debug, Serialize)]
pub struct RunOutcome {
    pub manifest_hash: u64,
    pub pass: bool,
    pub log: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl RunOutcome {
    fn push_artifact(&mut self, name: &str, content: Vec<u8>) {
        self.artifacts.push(Artifact { name: name.to_string(), fnv: fnv1a(&content), content });
    }

    /// Write artifacts plus the run log into a directory.
    pub fn write_to(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            crate::io::write_file(&dir.join(&a.name), &a.content)?;
        }
        let mut log = String::new();
        log.push_str(&format!("manifest_hash {:016x}\n", self.manifest_hash));
        log.push_str(&format!("pass {}\n", self.pass));
        for line in &self.log {
            log.push_str(line);
            log.push('\n');
        }
        for a in &self.artifacts {
            log.push_str(&format!("artifact {} fnv {:016x}\n", a.name, a.fnv));
        }
        crate::io::write_file(&dir.join("run.log"), log.as_bytes())?;
        Ok(())
    }
}

fn parse_exp_model(m: &ExperimentManifest) -> Result<ExpModel> {
    let mesh = m.mesh.unwrap_or(8);
    let rho = match (m.rho, m.gamma) {
        (Some(r), _) => Some(r),
        (None, Some(g)) => Some(correlation_from_gamma(g)?),
        _ => None,
    };
    match m.model.as_deref() {
        Some("mullin") => Ok(ExpModel::Mullin),
        Some("uipt") => Ok(ExpModel::Uipt),
        Some("bipolar") => Ok(ExpModel::Bipolar),
        Some("bipolar-tri") => Ok(ExpModel::BipolarTri),
        Some("schnyder") => Ok(ExpModel::Schnyder),
        Some("mated-crt") => Ok(ExpModel::MatedCrt { rho: rho.unwrap_or(0.0), mesh }),
        Some("lattice") => Ok(ExpModel::Lattice),
        Some("path") => Ok(ExpModel::PathGraph),
        other => Err(Error::domain(format!("unknown model {other:?}"))),
    }
}

/// Execute a manifest. Per-seed failures are recorded in the log without
/// aborting the batch; `pass` reflects the whole run.
pub fn run(manifest: &ExperimentManifest) -> Result<RunOutcome> {
    let mut out = RunOutcome {
        manifest_hash: manifest.hash(),
        pass: true,
        log: Vec::new(),
        artifacts: Vec::new(),
    };
    let (seeds, defaulted) = manifest.seed_list();
    if defaulted {
        out.log.push("master seed missing; defaulted to 0".into());
    }
    if seeds.is_empty() {
        out.log.push("warning: empty seed list; nothing to do".into());
        if let Some(dir) = &manifest.out_dir {
            out.write_to(dir)?;
        }
        return Ok(out);
    }
    match manifest.task.as_str() {
        "verify" => {
            let n = manifest.n.unwrap_or(100);
            let models = match manifest.model.as_deref() {
                Some("all") | None => {
                    vec!["mullin".to_string(), "uipt".into(), "bipolar".into(), "bipolar-tri".into()]
                }
                Some(m) => vec![m.to_string()],
            };
            #[derive(Serialize)]
            struct VerifyRow {
                model: String,
                seeds: usize,
                round_trip_pass: usize,
                oracle_pass: usize,
            }
            let mut rows = Vec::new();
            for model in &models {
                let mut rt = 0;
                let mut or = 0;
                for &seed in &seeds {
                    match run_verify_seed(model, n, seed) {
                        Ok((a, b)) => {
                            rt += a as usize;
                            or += b as usize;
                            if !(a && b) {
                                out.pass = false;
                                out.log.push(format!("verify {model} seed {seed}: round_trip={a} oracle={b}"));
                            }
                        }
                        Err(e) => {
                            out.pass = false;
                            out.log.push(format!("verify {model} seed {seed}: error {e}"));
                        }
                    }
                }
                rows.push(VerifyRow { model: model.clone(), seeds: seeds.len(), round_trip_pass: rt, oracle_pass: or });
            }
            let doc = serde_json::json!({
                "manifest_hash": format!("{:016x}", out.manifest_hash),
                "task": "verify",
                "n": n,
                "rows": rows,
            });
            out.push_artifact("verify.json", serde_json::to_vec_pretty(&doc).unwrap());
        }
        "couple" => {
            let n = manifest.n.unwrap_or(1000);
            let mesh = manifest.mesh.unwrap_or(64);
            let (model_name, law, variant) = match manifest.model.as_deref() {
                Some("bipolar") => ("bipolar", Model::BipolarUniform, Variant::Bipolar),
                Some("bipolar-tri") => ("bipolar-tri", Model::BipolarTriangulation, Variant::Bipolar),
                _ => ("mullin", Model::MullinSimple, Variant::Mullin),
            };
            let dist = make_distribution(law, None)?;
            let mut csv = String::from(
                "seed,d_sup,all_valid,max_len_g,max_len_h,fitted_c0,fitted_c2,cond1,cond2,cond3,cond4\n",
            );
            for &seed in &seeds {
                let walk = sample_walk(&dist, Window::symmetric(n), seed);
                let grid = bridge_couple(&walk, mesh, seed ^ 0x5eed)?;
                let rep = build_coupled_paths(&walk, &grid, variant, 1.0)?;
                let en = check_event_en(&walk, &grid, 1.0, 1.0, 1.0)?;
                if !rep.all_valid {
                    out.pass = false;
                    out.log.push(format!("couple {model_name} seed {seed}: invalid paths {:?}", rep.failures));
                }
                csv.push_str(&format!(
                    "{seed},{:.6},{},{},{},{:.6},{:.6},{},{},{},{}\n",
                    rep.d_sup,
                    rep.all_valid,
                    rep.max_len_g,
                    rep.max_len_h,
                    en.fitted_c0,
                    en.fitted_c2,
                    en.conditions[0],
                    en.conditions[1],
                    en.conditions[2],
                    en.conditions[3],
                ));
            }
            out.push_artifact(&format!("couple-{model_name}.csv", ), csv.into_bytes());
        }
        "exponent-ball" => {
            let model = parse_exp_model(manifest)?;
            let n = manifest.n.unwrap_or(100_000);
            let radii = manifest.radii.clone().unwrap_or_else(|| (8..=32).step_by(4).collect());
            let margin = manifest.band_margin.unwrap_or(0.5);
            let fit = estimate_ball_exponent(model, n, &radii, &seeds, margin)?;
            if fit.in_band == Some(false) {
                out.pass = false;
                out.log.push(format!("slope {:.3} outside band {:?}", fit.fit.slope, fit.band));
            }
            let mut csv = String::from("log_r,log_median_volume\n");
            for (x, y) in &fit.fit.points {
                csv.push_str(&format!("{x:.6},{y:.6}\n"));
            }
            let doc = serde_json::json!({
                "manifest_hash": format!("{:016x}", out.manifest_hash),
                "fit": fit,
            });
            out.push_artifact("ball-fit.json", serde_json::to_vec_pretty(&doc).unwrap());
            out.push_artifact("ball-series.csv", csv.into_bytes());
        }
        "exponent-diam" => {
            let model = parse_exp_model(manifest)?;
            let n_grid = manifest
                .n_grid
                .clone()
                .unwrap_or_else(|| vec![256, 512, 1024, 2048, 4096]);
            let fit = estimate_diameter_exponent(model, &n_grid, &seeds)?;
            let mut csv = String::from("log_n,log_median_diameter\n");
            for (x, y) in &fit.fit.points {
                csv.push_str(&format!("{x:.6},{y:.6}\n"));
            }
            let doc = serde_json::json!({
                "manifest_hash": format!("{:016x}", out.manifest_hash),
                "fit": fit,
            });
            out.push_artifact("diam-fit.json", serde_json::to_vec_pretty(&doc).unwrap());
            out.push_artifact("diam-series.csv", csv.into_bytes());
        }
        "selfcheck" => {
            let report = selfcheck();
            out.pass = report.all_pass;
            let doc = serde_json::json!({
                "manifest_hash": format!("{:016x}", out.manifest_hash),
                "report": report,
            });
            out.push_artifact("selfcheck.json", serde_json::to_vec_pretty(&doc).unwrap());
        }
        other => return Err(Error::domain(format!("unknown task {other}"))),
    }
    if let Some(dir) = &manifest.out_dir {
        out.write_to(dir)?;
    }
    Ok(out)
}

/// One verify seed: walk -> map -> walk identity plus the model's
/// isomorphism oracle.
fn run_verify_seed(model: &str, n: i64, seed: u64) -> Result<(bool, bool)> {
    match model {
        "mullin" => {
            let d = make_distribution(Model::MullinSimple, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let state = sew_mullin(&w)?;
            let rt = extract_walk(&state).values == w.values;
            let orc = verify_prop_tri(&w)?;
            Ok((rt, orc))
        }
        "uipt" => {
            let d = make_distribution(Model::Kreweras, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let state = sew_kreweras(&w)?;
            let rt = extract_walk_kreweras(&state).values == w.values;
            let (i, ii) = verify_prop6(&w)?;
            Ok((rt, i && ii))
        }
        "bipolar" | "bipolar-tri" => {
            let law = if model == "bipolar" { Model::BipolarUniform } else { Model::BipolarTriangulation };
            let d = make_distribution(law, None)?;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            // Finite round trip on a rejection-sampled small map.
            let mut rng = StreamRng::with_stream(seed, 77);
            let mut rt = true;
            for _ in 0..200 {
                if let Some(fw) = sample_finite_walk(&d, 2 + (seed % 20) as usize, &mut rng) {
                    let st = sew_bipolar_finite(&fw)?;
                    rt = interface_path(&st)?.values == fw.values;
                    break;
                }
            }
            let orc = verify_bar_q(&w, &d)? && verify_lr(&w, &d)?;
            Ok((rt, orc))
        }
        other => Err(Error::domain(format!("unknown verify model {other}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SelfcheckReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// The fast invariant suite: closed-form moments and exponent identities,
/// sweep-vs-brute-force, all bijection round trips and isomorphism oracles at
/// small windows, coupled-path validity, and a serialization round trip.
/// Designed to finish well under a minute.
pub fn selfcheck() -> SelfcheckReport {
    let mut checks: Vec<Check> = Vec::new();
    let mut push = |name: &str, result: Result<(bool, String)>| {
        let (pass, detail) = match result {
            Ok((p, d)) => (p, d),
            Err(e) => (false, format!("error: {e}")),
        };
        checks.push(Check { name: name.to_string(), pass, detail });
    };

    push("step-law moments", (|| {
        let mut worst: f64 = 0.0;
        for (model, want) in [
            (Model::MullinSimple, 0.0),
            (Model::Kreweras, 0.5),
            (Model::BipolarUniform, -0.5),
            (Model::BipolarTriangulation, -1.0 / (2.0f64).sqrt()),
        ] {
            let d = make_distribution(model, None)?;
            worst = worst.max((d.correlation() - want).abs());
        }
        Ok((worst < 1e-12, format!("max |corr error| = {worst:.2e}")))
    })());

    push("gamma dictionary involution", (|| {
        let mut worst: f64 = 0.0;
        for k in 0..99 {
            let rho = -0.99 + 1.98 * (k as f64) / 98.0;
            let back = correlation_from_gamma(gamma_from_correlation(rho)?)?;
            worst = worst.max((back - rho).abs());
        }
        Ok((worst < 1e-12, format!("max involution error = {worst:.2e}")))
    })());

    push("exponent formulas", (|| {
        let w4 = (watabiki((8.0f64 / 3.0).sqrt())? - 4.0).abs();
        let (dm, dp) = ball_exponent_bounds((2.0f64).sqrt())?;
        let e1 = (dp - 5.0).abs();
        let e2 = (dm - (3.0 + (5.0f64).sqrt()) / 2.0).abs();
        let mut sandwich = true;
        for k in 0..100 {
            let g = 0.2 + 1.7 * (k as f64) / 99.0;
            let w = watabiki(g)?;
            let (lo, hi) = ball_exponent_bounds(g)?;
            let (cl, cu) = chi_bounds(g)?;
            sandwich &= lo <= w + 1e-12 && w <= hi + 1e-12 && cl <= cu + 1e-12;
        }
        let _ = exponent_table(&[1.0, (2.0f64).sqrt()])?;
        Ok((
            w4 < 1e-12 && e1 < 1e-12 && e2 < 1e-12 && sandwich,
            format!("|w(sqrt 8/3)-4|={w4:.1e} |d+-5|={e1:.1e} |d--phi|={e2:.1e} sandwich={sandwich}"),
        ))
    })());

    push("H-graph sweep vs brute force", (|| {
        for (model, variant) in [
            (Model::MullinSimple, Variant::Mullin),
            (Model::BipolarUniform, Variant::Bipolar),
        ] {
            let d = make_distribution(model, None)?;
            for seed in 0..25 {
                let n = 4 + (seed % 36) as i64;
                let w = sample_walk(&d, Window::new(-n - 1, n), seed);
                if !sweep_matches_brute_force(&w, variant, Window::symmetric(n))? {
                    return Ok((false, format!("{model:?} seed {seed}")));
                }
            }
        }
        Ok((true, "50 windows".into()))
    })());

    push("mullin round trip + triangle oracle", (|| {
        let d = make_distribution(Model::MullinSimple, None)?;
        for seed in 0..40 {
            let n = 2 + (seed % 48) as i64;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let st = sew_mullin(&w)?;
            if extract_walk(&st).values != w.values || !verify_prop_tri(&w)? {
                return Ok((false, format!("seed {seed}")));
            }
        }
        Ok((true, "40 windows".into()))
    })());

    push("percolation round trip + reduction oracle", (|| {
        let d = make_distribution(Model::Kreweras, None)?;
        for seed in 0..40 {
            let n = 2 + (seed % 48) as i64;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            let st = sew_kreweras(&w)?;
            let (i, ii) = verify_prop6(&w)?;
            if extract_walk_kreweras(&st).values != w.values || !i || !ii {
                return Ok((false, format!("seed {seed}")));
            }
        }
        Ok((true, "40 windows".into()))
    })());

    push("bipolar round trip + radial oracle", (|| {
        let d = make_distribution(Model::BipolarUniform, None)?;
        let mut rng = StreamRng::new(0x1face);
        let mut done = 0;
        while done < 30 {
            if let Some(fw) = sample_finite_walk(&d, 2 + rng.below(18) as usize, &mut rng) {
                let st = sew_bipolar_finite(&fw)?;
                if interface_path(&st)?.values != fw.values {
                    return Ok((false, format!("finite walk {:?}", fw.values)));
                }
                done += 1;
            }
        }
        for seed in 0..30 {
            let n = 2 + (seed % 38) as i64;
            let w = sample_walk(&d, Window::new(-n - 1, n), seed);
            if !verify_bar_q(&w, &d)? || !verify_lr(&w, &d)? {
                return Ok((false, format!("window seed {seed}")));
            }
        }
        Ok((true, "30 finite + 30 windows".into()))
    })());

    push("schnyder wood round trip", (|| {
        let d = make_distribution(Model::BipolarTriangulation, None)?;
        let mut rng = StreamRng::new(0x600d);
        let mut done = 0;
        while done < 20 {
            if let Some(fw) = sample_wooded_walk(&d, 3 + rng.below(20) as usize, &mut rng) {
                let st = sew_bipolar_finite(&fw)?;
                if !crate::bipolar::satisfies_wood_shape(&st) {
                    continue;
                }
                let wood = schnyder_from_bipolar(&st)?;
                if !wooded_round_trip(&st, &wood) {
                    return Ok((false, format!("walk {:?}", fw.values)));
                }
                done += 1;
            }
        }
        Ok((true, "20 wooded maps".into()))
    })());

    push("coupled paths valid under bridge coupling", (|| {
        let d = make_distribution(Model::MullinSimple, None)?;
        for seed in 0..4 {
            let w = sample_walk(&d, Window::symmetric(200), seed);
            let g = bridge_couple(&w, 8, seed + 5)?;
            let rep = build_coupled_paths(&w, &g, Variant::Mullin, 1.0)?;
            if !rep.all_valid {
                return Ok((false, format!("seed {seed}: {:?}", rep.failures)));
            }
        }
        Ok((true, "4 couplings at n=200".into()))
    })());

    push("serialization round trips", (|| {
        let d = make_distribution(Model::Kreweras, None)?;
        let w = sample_walk(&d, Window::symmetric(25), 1);
        let ok1 = crate::io::walk_from_bytes(&crate::io::walk_to_bytes(&w))?.values == w.values;
        let st = sew_kreweras(&w)?;
        let back = crate::io::map_from_json(&crate::io::map_to_json(&st.map)?)?;
        let ok2 = crate::pmap::isomorphic_rooted(&back, back.root, &st.map, st.map.root);
        Ok((ok1 && ok2, format!("walk={ok1} map={ok2}")))
    })());

    let all_pass = checks.iter().all(|c| c.pass);
    SelfcheckReport { checks, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selfcheck_passes_fast() {
        let t = std::time::Instant::now();
        let report = selfcheck();
        for c in &report.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(report.all_pass);
        assert!(t.elapsed().as_secs() < 60, "selfcheck took {:?}", t.elapsed());
    }

    #[test]
    fn manifest_round_trip_and_hash_stability() {
        let m = ExperimentManifest::from_json(
            r#"{"task":"verify","model":"mullin","n":40,"seeds":[1,2,3]}"#,
        )
        .unwrap();
        let h1 = m.hash();
        let m2 = ExperimentManifest::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(h1, m2.hash());
        assert!(ExperimentManifest::from_json(r#"{"task":"x","bogus":1}"#).is_err());
    }

    #[test]
    fn run_verify_and_determinism() {
        let m = ExperimentManifest::from_json(
            r#"{"task":"verify","model":"mullin","n":30,"seeds":[1,2,3,4]}"#,
        )
        .unwrap();
        let a = run(&m).unwrap();
        let b = run(&m).unwrap();
        assert!(a.pass);
        assert_eq!(a.artifacts.len(), b.artifacts.len());
        for (x, y) in a.artifacts.iter().zip(&b.artifacts) {
            assert_eq!(x.fnv, y.fnv, "artifact {} not byte-identical", x.name);
        }
    }

    #[test]
    fn verify_all_consolidated_report() {
        let m = ExperimentManifest::from_json(r#"{"task":"verify","n":25,"seeds":[1,2]}"#).unwrap();
        let out = run(&m).unwrap();
        assert!(out.pass);
        let doc: serde_json::Value =
            serde_json::from_slice(&out.artifacts[0].content).unwrap();
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert_eq!(row["round_trip_pass"], 2);
            assert_eq!(row["oracle_pass"], 2);
        }
    }

    #[test]
    fn empty_seed_list_is_noop_with_warning() {
        let m = ExperimentManifest::from_json(r#"{"task":"verify","model":"mullin","seeds":[]}"#)
            .unwrap();
        let out = run(&m).unwrap();
        assert!(out.pass);
        assert!(out.log.iter().any(|l| l.contains("empty seed list")));
        assert!(out.artifacts.is_empty());
    }

    #[test]
    fn missing_seed_defaults_and_logs() {
        let m = ExperimentManifest::from_json(
            r#"{"task":"couple","model":"mullin","n":64,"mesh":8,"seed_count":2}"#,
        )
        .unwrap();
        let out = run(&m).unwrap();
        assert!(out.pass);
        assert!(out.log.iter().any(|l| l.contains("defaulted")));
    }
}
