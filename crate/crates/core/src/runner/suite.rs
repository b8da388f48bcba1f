//! Suite execution, offline analysis and GHZ studies.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{SuiteConfig, DEFAULT_MAP_TAU_US};
use super::counts::write_counts;
use super::render::{emit_failure_map, MapFormat};
use crate::analysis::{
    bell_delta_map, delta_map, detect_collisions, estimate_fidelity, fit_exponential,
    fit_zz_oscillation, ghz_statistics, CollisionReport, CollisionThresholds, ExpFit, FailureMap,
    FidelitySeries, GhzStats, ZzFit,
};
use crate::circuit::{build_pattern, Circuit, PartitionInput, PatternSpec, Side};
use crate::device_file::DeviceFile;
use crate::error::{Error, Result};
use crate::par::ExecPolicy;
use crate::seed;
use crate::simulator::{CountsRecord, DeviceModel, Simulator};
use crate::topology::{
    bell_pairs, bipartition, random_chains, triplet_cover_seeded, Bipartition, ChipTopology,
    TripletCover,
};

/// Partition data owned alongside the pattern that uses it.
#[derive(Debug, Clone, PartialEq)]
pub enum OwnedPartition {
    None,
    Bipartition(Bipartition),
    Triplets(TripletCover),
    Pairs(Vec<(usize, usize)>),
    Chains(Vec<Vec<usize>>),
}

impl OwnedPartition {
    pub fn as_input(&self) -> PartitionInput<'_> {
        match self {
            OwnedPartition::None => PartitionInput::None,
            OwnedPartition::Bipartition(b) => PartitionInput::Bipartition(b),
            OwnedPartition::Triplets(t) => PartitionInput::Triplets(t),
            OwnedPartition::Pairs(p) => PartitionInput::Pairs(p),
            OwnedPartition::Chains(c) => PartitionInput::Chains(c),
        }
    }
}

/// Collision triplets of the device, empty when frequencies are missing.
pub fn flagged_collisions(device: &DeviceModel, topo: &ChipTopology) -> Result<Option<CollisionReport>> {
    match detect_collisions(device, topo, &CollisionThresholds::default()) {
        Ok(r) => Ok(Some(r)),
        Err(Error::MissingFrequency(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Layout used for `spec`. Collision triplets are placed first in the
/// triplet cover; GHZ chains are drawn from a stream keyed by the pattern id
/// so that the layout can be rebuilt from the counts alone.
pub fn partition_for(
    spec: &PatternSpec,
    device: &DeviceModel,
    topo: &ChipTopology,
) -> Result<OwnedPartition> {
    Ok(match *spec {
        PatternSpec::BlankOne | PatternSpec::BlankPlusEchoed => OwnedPartition::None,
        PatternSpec::CheckerboardOne { .. }
        | PatternSpec::CheckerboardPlusEchoed { .. }
        | PatternSpec::CheckerboardOneActive { .. } => OwnedPartition::Bipartition(bipartition(topo)?),
        PatternSpec::TripletCollision { .. } => {
            let preferred: Vec<_> = flagged_collisions(device, topo)?
                .map(|r| r.collisions.iter().map(|c| c.triplet).collect())
                .unwrap_or_default();
            OwnedPartition::Triplets(triplet_cover_seeded(topo, &preferred))
        }
        PatternSpec::Bell { layout, .. } => OwnedPartition::Pairs(bell_pairs(topo, layout)),
        PatternSpec::GhzChain { chain_length } => OwnedPartition::Chains(random_chains(
            topo,
            chain_length,
            1,
            seed::derive(0, &spec.to_string(), 0),
        )?),
    })
}

/// Delays a pattern is run at: the collision pattern has a fixed length of
/// one CX.
pub fn pattern_taus(spec: &PatternSpec, device: &DeviceModel, grid: &[f64]) -> Vec<f64> {
    match spec {
        PatternSpec::TripletCollision { .. } => vec![device.gate_durations.cx_ns / 1000.0],
        _ => grid.to_vec(),
    }
}

pub fn build_for(
    spec: &PatternSpec,
    partition: &OwnedPartition,
    device: &DeviceModel,
    topo: &ChipTopology,
    tau_us: f64,
) -> Result<Circuit> {
    build_pattern(spec, topo, partition.as_input(), tau_us, &device.gate_durations)
}

/// Simulates every pattern at every delay. Each (pattern, delay) job draws
/// from its own seed stream, so the output does not depend on `policy`.
pub fn run_suite(
    cfg: &SuiteConfig,
    device: &DeviceModel,
    topo: &ChipTopology,
    policy: ExecPolicy,
) -> Result<Vec<CountsRecord>> {
    cfg.validate()?;
    let sim = Simulator::new(device, topo)?.with_policy(ExecPolicy::Sequential);
    let grid = cfg.tau_grid();
    let mut jobs = Vec::new();
    for id in &cfg.patterns {
        let spec = id.0;
        let partition = partition_for(&spec, device, topo)?;
        for (k, tau) in pattern_taus(&spec, device, &grid).into_iter().enumerate() {
            jobs.push((spec, partition.clone(), k, tau));
        }
    }
    policy.try_map(&jobs, |(spec, partition, k, tau)| {
        let circuit = build_for(spec, partition, device, topo, *tau)?;
        sim.run(&circuit, cfg.shots, seed::derive(cfg.seed, &circuit.pattern_id, *k))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitExpFit {
    pub pattern_id: String,
    pub qubit: usize,
    pub fit: Option<ExpFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitZzFit {
    pub pattern_id: String,
    pub qubit: usize,
    pub n_couplings: usize,
    pub fit: Option<ZzFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub map_tau_us: f64,
    pub series: Vec<FidelitySeries>,
    pub exp_fits: Vec<QubitExpFit>,
    pub zz_fits: Vec<QubitZzFit>,
    pub maps: Vec<FailureMap>,
    pub collisions: Option<CollisionReport>,
}

impl AnalysisReport {
    pub fn series_for(&self, pattern_id: &str, group: &[usize]) -> Option<&FidelitySeries> {
        self.series
            .iter()
            .find(|s| s.pattern_id == pattern_id && s.group == group)
    }

    pub fn map(&self, title: &str) -> Option<&FailureMap> {
        self.maps.iter().find(|m| m.title == title)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Turns counts into fidelity series, fits and failure maps. Target groups
/// are recovered by rebuilding each pattern from its id.
pub fn analyze(
    records: &[CountsRecord],
    device: &DeviceModel,
    topo: &ChipTopology,
    map_tau_us: Option<f64>,
    policy: ExecPolicy,
) -> Result<AnalysisReport> {
    let mut by_pattern: BTreeMap<String, Vec<&CountsRecord>> = BTreeMap::new();
    for r in records {
        by_pattern.entry(r.pattern_id.clone()).or_default().push(r);
    }
    let mut series = Vec::new();
    let mut exp_jobs = Vec::new();
    let mut zz_jobs = Vec::new();
    for (id, recs) in &by_pattern {
        let spec: PatternSpec = id.parse()?;
        let partition = partition_for(&spec, device, topo)?;
        let circuit = build_for(&spec, &partition, device, topo, recs[0].tau_us)?;
        for group in &circuit.target_groups {
            let s = FidelitySeries::from_records(recs.iter().copied(), group)?;
            if group.len() == 1 {
                let q = group[0];
                match spec {
                    PatternSpec::BlankOne
                    | PatternSpec::CheckerboardOne { .. }
                    | PatternSpec::CheckerboardOneActive { .. } => exp_jobs.push((s.clone(), q)),
                    PatternSpec::BlankPlusEchoed | PatternSpec::CheckerboardPlusEchoed { .. } => {
                        let n = topo
                            .neighbors(q)
                            .iter()
                            .filter(|nb| circuit.target_groups.iter().any(|g| g.contains(nb)))
                            .count();
                        zz_jobs.push((s.clone(), q, n));
                    }
                    _ => {}
                }
            }
            series.push(s);
        }
    }
    let exp_fits = policy.map(&exp_jobs, |(s, q)| {
        let r = fit_exponential(&s.taus(), &s.values());
        QubitExpFit {
            pattern_id: s.pattern_id.clone(),
            qubit: *q,
            error: r.as_ref().err().map(|e| e.to_string()),
            fit: r.ok(),
        }
    });
    let zz_fits = policy.map(&zz_jobs, |(s, q, n)| {
        let r = fit_zz_oscillation(&s.taus(), &s.values(), *n);
        QubitZzFit {
            pattern_id: s.pattern_id.clone(),
            qubit: *q,
            n_couplings: *n,
            error: r.as_ref().err().map(|e| e.to_string()),
            fit: r.ok(),
        }
    });

    let map_tau = pick_map_tau(&series, map_tau_us.unwrap_or(DEFAULT_MAP_TAU_US));
    let maps = comparison_maps(&series, topo, map_tau, device)?;
    Ok(AnalysisReport {
        map_tau_us: map_tau,
        series,
        exp_fits,
        zz_fits,
        maps,
        collisions: flagged_collisions(device, topo)?,
    })
}

/// Grid point nearest to `target` among the delays of non-collision patterns.
fn pick_map_tau(series: &[FidelitySeries], target: f64) -> f64 {
    series
        .iter()
        .filter(|s| !s.pattern_id.starts_with("triplet"))
        .flat_map(|s| s.points.iter().map(|p| p.tau_us))
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(target)
}

fn singles_at(series: &[FidelitySeries], pattern: &str, tau: f64) -> BTreeMap<usize, f64> {
    series
        .iter()
        .filter(|s| s.pattern_id == pattern && s.group.len() == 1)
        .filter_map(|s| s.at(tau).ok().map(|f| (s.group[0], f)))
        .collect()
}

fn comparison_maps(
    series: &[FidelitySeries],
    topo: &ChipTopology,
    tau: f64,
    device: &DeviceModel,
) -> Result<Vec<FailureMap>> {
    let ids: Vec<String> = {
        let mut v: Vec<String> = series.iter().map(|s| s.pattern_id.clone()).collect();
        v.dedup();
        v
    };
    let has = |id: &str| ids.iter().any(|i| i == id);
    let mut maps = Vec::new();
    let compare = |reference: &str, test: &str, at: f64| -> Result<Option<FailureMap>> {
        let r = singles_at(series, reference, at);
        let t = singles_at(series, test, at);
        if t.is_empty() {
            return Ok(None);
        }
        delta_map(topo, format!("{reference} - {test}"), at, &r, &t).map(Some)
    };
    for id in &ids {
        match id.parse::<PatternSpec>()? {
            PatternSpec::CheckerboardOne { .. } | PatternSpec::CheckerboardOneActive { .. }
                if has("blank_one") =>
            {
                maps.extend(compare("blank_one", id, tau)?)
            }
            PatternSpec::CheckerboardPlusEchoed { .. } if has("blank_plus") => {
                maps.extend(compare("blank_plus", id, tau)?)
            }
            PatternSpec::TripletCollision { with_cnot: true } if has("triplet.delay") => {
                maps.extend(compare("triplet.delay", id, device.gate_durations.cx_ns / 1000.0)?)
            }
            PatternSpec::Bell { .. } => {
                let a = PatternSpec::CheckerboardPlusEchoed { side: Side::A }.to_string();
                let b = PatternSpec::CheckerboardPlusEchoed { side: Side::B }.to_string();
                if !(has(&a) && has(&b)) {
                    continue;
                }
                let mut single = singles_at(series, &a, tau);
                single.extend(singles_at(series, &b, tau));
                let bell: Vec<((usize, usize), f64)> = series
                    .iter()
                    .filter(|s| s.pattern_id == *id && s.group.len() == 2)
                    .filter_map(|s| s.at(tau).ok().map(|f| ((s.group[0], s.group[1]), f)))
                    .collect();
                let bp = bipartition(topo)?;
                maps.push(bell_delta_map(topo, format!("checkerboard_plus - {id}"), tau, &bp, &single, &bell)?);
            }
            _ => {}
        }
    }
    Ok(maps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzStudyConfig {
    pub lengths: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub shots: u64,
    pub tau_us: f64,
}

/// Fidelity statistics of GHZ states on `samples` random chains per length.
pub fn ghz_study(
    device: &DeviceModel,
    topo: &ChipTopology,
    cfg: &GhzStudyConfig,
    policy: ExecPolicy,
) -> Result<Vec<GhzStats>> {
    let sim = Simulator::new(device, topo)?.with_policy(ExecPolicy::Sequential);
    let mut out = Vec::new();
    for &length in &cfg.lengths {
        let spec = PatternSpec::GhzChain { chain_length: length };
        let id = spec.to_string();
        let chains = random_chains(topo, length, cfg.samples, seed::derive(cfg.seed, &id, 0))?;
        let fids = policy.try_map_indexed(&chains, |k, chain| {
            let c = build_pattern(
                &spec,
                topo,
                PartitionInput::Chains(std::slice::from_ref(chain)),
                cfg.tau_us,
                &device.gate_durations,
            )?;
            let r = sim.run(&c, cfg.shots, seed::derive(cfg.seed, &id, k + 1))?;
            estimate_fidelity(&r, chain)
        })?;
        out.push(ghz_statistics(length, &fids)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub config: SuiteConfig,
    pub device_sha256: String,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn load_device(path: &Path) -> Result<(ChipTopology, DeviceModel, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = DeviceFile::parse(&text)?;
    let topo = ChipTopology::from_device_file(&file)?;
    let device = DeviceModel::from_file(&file, &topo)?;
    Ok((topo, device, sha256_hex(text.as_bytes())))
}

fn slug(title: &str) -> String {
    let mut s: String = title
        .replace('+', "p")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s
}

/// Runs the suite and writes counts, analysis, maps and a manifest into the
/// configured output directory.
pub fn run_to_dir(cfg: &SuiteConfig, policy: ExecPolicy) -> Result<RunManifest> {
    let started = unix_now();
    let (topo, device, device_sha256) = load_device(&cfg.device)?;
    let records = run_suite(cfg, &device, &topo, policy)?;
    let report = analyze(&records, &device, &topo, cfg.map_tau_us, policy)?;

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir.join("maps")).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut write = |rel: PathBuf, content: &str| -> Result<()> {
        let path = dir.join(&rel);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        files.push(FileDigest {
            path: rel,
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len() as u64,
        });
        Ok(())
    };
    write("counts.txt".into(), &write_counts(&records))?;
    write("analysis.json".into(), &report.to_json())?;
    for m in &report.maps {
        let base = slug(&m.title);
        write(
            PathBuf::from("maps").join(format!("{base}.json")),
            &m.to_json(),
        )?;
        write(PathBuf::from("maps").join(format!("{base}.csv")), &emit_failure_map(m, MapFormat::Csv)?)?;
        if topo.coords().is_some() {
            write(PathBuf::from("maps").join(format!("{base}.svg")), &emit_failure_map(m, MapFormat::Svg)?)?;
        }
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_s: started,
        finished_unix_s: unix_now(),
        config: cfg.clone(),
        device_sha256,
        files,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
        .map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::PatternSpecId;

    fn small() -> (ChipTopology, DeviceModel) {
        let topo = ChipTopology::path(4);
        let dev = DeviceModel::uniform(4, 60.0, 80.0).with_uniform_coupling(&topo, 0.1);
        (topo, dev)
    }

    fn cfg(patterns: &[&str]) -> SuiteConfig {
        SuiteConfig {
            device: "unused".into(),
            patterns: patterns.iter().map(|p| PatternSpecId(p.parse().unwrap())).collect(),
            tau_grid_us: Some(vec![0.0, 10.0, 40.0, 80.0]),
            shots: 500,
            seed: 9,
            output_dir: "unused".into(),
            map_tau_us: None,
        }
    }

    #[test]
    fn suite_is_policy_independent() {
        let (topo, dev) = small();
        let c = cfg(&["blank_one", "checkerboard_one.A", "checkerboard_plus.B"]);
        let a = run_suite(&c, &dev, &topo, ExecPolicy::Parallel).unwrap();
        let b = run_suite(&c, &dev, &topo, ExecPolicy::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn analysis_builds_maps_and_fits() {
        let (topo, dev) = small();
        let c = cfg(&["blank_one", "checkerboard_one.A", "checkerboard_one.B"]);
        let recs = run_suite(&c, &dev, &topo, ExecPolicy::Parallel).unwrap();
        let rep = analyze(&recs, &dev, &topo, None, ExecPolicy::Parallel).unwrap();
        assert_eq!(rep.map_tau_us, 80.0);
        assert_eq!(rep.maps.len(), 2);
        assert_eq!(rep.exp_fits.len(), 4 + 2 + 2);
        assert!(rep.exp_fits.iter().all(|f| f.fit.is_some()));
        let m = rep.map("blank_one - checkerboard_one.A").unwrap();
        assert_eq!(m.compared, vec![0, 2]);
        assert_eq!(m.values[1], 0.0);
    }

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("checkerboard_plus - bell.phi+.dense"), "checkerboard_plus_bell.phip.dense");
    }
}
