use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ionqv_core::compiler::{
    builtin_tables, load_tables, run_table_suite, synthesize_exact, synthesize_variational, AuditOptions, Budget, ExactOptions, SlotSpec,
};
use ionqv_core::manifold::{
    field_sweep, search_top_k, CostParams, LevelModel, ManifoldCandidate, Mechanism, MemoryPairs, SearchResult, SweepRow, GAUSS,
};
use ionqv_core::qec::{build_repcode_circuit, matched_distances, sample_logical_error, ChannelModel, DecoderKind, DepolarizingReading};
use ionqv_core::sampling::{build_bv, gates_to_threshold, Architecture, BvLayout, CircuitPolicy, Connectivity, CrossingRule, Statistic};
use ionqv_core::sim::text::format_circuit;
use ionqv_core::sim::RegisterConfig;
use ionqv_core::{CMat, C64};

use crate::args::*;
use crate::output::{csv_bytes, emit, json_bytes};
use crate::CliError;

pub const DATA_DIR_ENV: &str = "IONQV_DATA_DIR";

fn data_file(name: &str) -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(|d| Path::new(&d).join(name))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn require_seed(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Config("seed: required for stochastic runs (--seed)".into()))
}

fn report<T: Serialize>(rows: &[T], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => csv_bytes(rows)?,
        Format::Json => json_bytes(rows)?,
    };
    emit(out, &bytes)
}

/// Row-major complex matrix: each line holds re im pairs for one row.
pub fn parse_matrix(src: &str) -> Result<CMat, CliError> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (k, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| CliError::Config(format!("target line {}: {s:?}: {e}", k + 1))))
            .collect::<Result<Vec<f64>, _>>()?;
        if nums.len() % 2 != 0 {
            return Err(CliError::Config(format!("target line {}: odd number of values", k + 1)));
        }
        rows.push(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("target: expected a square matrix, got {n} rows")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn compile(a: &CompileArgs) -> Result<(), CliError> {
    if a.target.as_os_str().is_empty() || a.register.as_os_str().is_empty() {
        return Err(CliError::Config("target, register: both required".into()));
    }
    let u = parse_matrix(&read(&a.target)?)?;
    let cfg: RegisterConfig = crate::from_json_str(&read(&a.register)?, "register")?;
    let reg = cfg.build()?;
    if reg.dim() != u.nrows() {
        return Err(CliError::Config(format!("target is {}x{0}, register dimension is {}", u.nrows(), reg.dim())));
    }
    let (gates, header) = if reg.len() == 1 {
        let rep = synthesize_exact(&u, reg.ion(0), ExactOptions::default())?;
        let h = format!("# method {}, pulses {}, bound {}, distance {:.3e}\n", rep.method, rep.pulse_count, rep.bound, rep.distance);
        (rep.sequence.applied(), h)
    } else {
        let seed = require_seed(a.seed)?;
        let mut template = Vec::new();
        for i in 0..reg.len() {
            for j in i + 1..reg.len() {
                template.push(SlotSpec::Ms { ion_i: i, ion_j: j, pair_i: (0, 1), pair_j: (0, 1) });
            }
        }
        for (i, ion) in reg.ions().iter().enumerate() {
            for &(p, q) in &ion.allowed_r {
                template.push(SlotSpec::R { ion: i, a: p, b: q });
            }
        }
        let budget = Budget { layers_max: a.layers_max, restarts: a.restarts, sweeps: a.sweeps };
        let rep = synthesize_variational(&reg, &u, &template, budget, seed)?;
        let h = format!(
            "# method variational, layers {}, ms {}, gates {}, distance {:.3e}, converged {}\n",
            rep.layers, rep.ms_count, rep.gate_count, rep.distance, rep.converged
        );
        (rep.gates, h)
    };
    emit(a.out.as_deref(), format!("{header}{}", format_circuit(&gates)).as_bytes())
}

pub fn tables(a: &TablesArgs) -> Result<(), CliError> {
    let file = match a.tables.clone().or_else(|| data_file("tables.json").filter(|p| p.exists())) {
        Some(p) => load_tables(&read(&p)?)?,
        None => builtin_tables(),
    };
    let opts = AuditOptions { restarts: a.restarts, sweeps: a.sweeps, seed: a.seed, search_depth: a.search_depth };
    let entries = run_table_suite(&file, opts)?;
    emit(a.out.as_deref(), &json_bytes(&entries)?)
}

#[derive(Serialize)]
struct XebRow {
    #[serde(rename = "N")]
    qubits: usize,
    n: usize,
    policy: &'static str,
    gate_count: f64,
    statistic: &'static str,
    stderr: f64,
    seed: u64,
    architecture: &'static str,
    rule: &'static str,
    threshold: f64,
    circuits: usize,
    unreached: usize,
}

pub fn xeb(a: &XebArgs) -> Result<(), CliError> {
    let seed = require_seed(a.seed)?;
    let (conn, policy_name) = match a.policy {
        Policy::AllToAll => (Connectivity::AllToAll, "all_to_all"),
        Policy::Minimal => (Connectivity::Minimal, "minimal"),
        Policy::MsLimited => (Connectivity::MsLimited, "ms_limited"),
    };
    let (arch, arch_name) = match a.arch {
        Arch::Brickwork => (Architecture::Brickwork, "brickwork"),
        Arch::Longrange => (Architecture::LongRange, "longrange"),
    };
    let (stat, stat_name) = match a.statistic {
        StatisticArg::Xeb => (Statistic::Xeb, "xeb"),
        StatisticArg::Moment => (Statistic::Moment, "moment"),
    };
    let (rule, rule_name) = match a.rule {
        RuleArg::EnsembleMean => (CrossingRule::EnsembleMean, "ensemble_mean"),
        RuleArg::PerCircuit => (CrossingRule::PerCircuit, "per_circuit"),
    };
    let threshold = a.threshold.unwrap_or(stat.default_threshold());
    let mut rows = Vec::new();
    for &nq in &a.qubits {
        for &n in &a.n {
            if n == 0 || nq % n != 0 {
                eprintln!("skipping N = {nq}, n = {n}: N is not a multiple of n");
                continue;
            }
            let policy = CircuitPolicy::new(conn, arch, n, nq / n)?;
            let s = gates_to_threshold(&policy, threshold, stat, rule, a.circuits, seed, a.max_gates)?;
            rows.push(XebRow {
                qubits: nq,
                n,
                policy: policy_name,
                gate_count: s.mean,
                statistic: stat_name,
                stderr: s.stderr,
                seed,
                architecture: arch_name,
                rule: rule_name,
                threshold,
                circuits: a.circuits,
                unreached: s.unreached,
            });
        }
    }
    report(&rows, a.format, a.out.as_deref())
}

#[derive(Serialize)]
struct BvRow {
    secret: String,
    n: usize,
    intra: usize,
    inter: usize,
    total: usize,
    success_probability: f64,
}

pub fn bv(a: &BvArgs) -> Result<(), CliError> {
    let mut secrets: Vec<String> = a.secret.clone();
    if let Some(len) = a.random_length {
        let mut rng = ChaCha8Rng::seed_from_u64(require_seed(a.seed)?);
        for _ in 0..a.random_count {
            secrets.push((0..len).map(|_| if rng.random::<bool>() { '1' } else { '0' }).collect());
        }
    }
    if secrets.is_empty() {
        return Err(CliError::Config("secret: give --secret or --random-length".into()));
    }
    let mut rows = Vec::new();
    for s in &secrets {
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Config(format!("secret: {s:?} is not a bit string")));
        }
        let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
        for &layout in &a.layout {
            let (l, n) = match layout {
                LayoutArg::One => (BvLayout::OneQubitIons, 1),
                LayoutArg::Two => (BvLayout::TwoQubitIons, 2),
            };
            if !bits.len().is_multiple_of(n) {
                eprintln!("skipping {s} with n = {n}: length is not a multiple of n");
                continue;
            }
            let c = build_bv(&bits, l)?;
            rows.push(BvRow {
                secret: s.clone(),
                n,
                intra: c.counts.intra,
                inter: c.counts.inter,
                total: c.counts.intra + c.counts.inter,
                success_probability: c.success_probability()?,
            });
        }
    }
    report(&rows, a.format, a.out.as_deref())
}

#[derive(Serialize)]
struct RepRow {
    #[serde(rename = "L")]
    l: usize,
    n: usize,
    d: usize,
    rounds: usize,
    p: f64,
    #[serde(rename = "p_L")]
    p_l: f64,
    ci_low: f64,
    ci_high: f64,
    shots: u64,
    seed: u64,
    failures: u64,
    decoder: &'static str,
}

pub fn repcode(a: &RepcodeArgs) -> Result<(), CliError> {
    let seed = require_seed(a.seed)?;
    let (decoder, dec_name) = match a.decoder {
        DecoderArg::SpaceTime => (DecoderKind::SpaceTime, "space_time"),
        DecoderArg::PerRound => (DecoderKind::PerRound, "per_round"),
    };
    let reading = match a.reading {
        ReadingArg::NonIdentity => DepolarizingReading::NonIdentity,
        ReadingArg::IncludeIdentity => DepolarizingReading::IncludeIdentity,
    };
    let mut rows = Vec::new();
    for &l in &a.l {
        let (d1, d2) = matched_distances(l)?;
        if d1 % 2 == 0 {
            return Err(CliError::Config(format!("l: L = {l} gives an even n=1 distance; use odd L")));
        }
        for &n in &a.n {
            let d = match n {
                1 => d1,
                2 => d2,
                _ => return Err(CliError::Config(format!("n: {n} is not 1 or 2"))),
            };
            let rounds = match (a.rounds, a.rounds_rule, n) {
                (Some(r), _, _) => r,
                (None, RoundsRule::HalfDistance, 2) => d2.div_ceil(2),
                (None, _, _) => d1,
            };
            let circuit = build_repcode_circuit(d, n, rounds)?;
            for &p in &a.p {
                let model = ChannelModel { reading, ..ChannelModel::from_p(p)? };
                let est = sample_logical_error(&circuit, &model, decoder, a.shots, seed)?;
                rows.push(RepRow {
                    l,
                    n,
                    d,
                    rounds,
                    p: model.p(),
                    p_l: est.p_l,
                    ci_low: est.ci_low,
                    ci_high: est.ci_high,
                    shots: est.shots,
                    seed,
                    failures: est.failures,
                    decoder: dec_name,
                });
            }
        }
    }
    report(&rows, a.format, a.out.as_deref())
}

#[derive(Serialize)]
struct CandidateRow {
    rank: usize,
    field_g: f64,
    states: String,
    edges: usize,
    total: f64,
    memory: f64,
    internal: f64,
    spectator: f64,
    kappa: f64,
    mean_abs_element: f64,
    t_r_us: f64,
    t_g_us: f64,
}

#[derive(Serialize)]
struct SweepCsvRow {
    field_g: f64,
    candidates: usize,
    median_cost: f64,
    min_cost: f64,
    max_cost: f64,
    median_t_g_us: f64,
    min_t_g_us: f64,
    max_t_g_us: f64,
}

fn candidate_row(rank: usize, field_g: f64, c: &ManifoldCandidate) -> CandidateRow {
    CandidateRow {
        rank,
        field_g,
        states: c.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
        edges: c.edges.len(),
        total: c.cost.total,
        memory: c.cost.memory,
        internal: c.cost.internal,
        spectator: c.cost.spectator,
        kappa: c.cost.kappa,
        mean_abs_element: c.mean_abs_element,
        t_r_us: c.cost.t_r * 1e6,
        t_g_us: c.cost.t_g * 1e6,
    }
}

pub fn parse_sweep(s: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Config(format!("field_sweep: {s:?} is not lo:hi:steps"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || lo < 0.0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi, steps))
}

pub fn manifold(a: &ManifoldArgs) -> Result<(), CliError> {
    let model = match a.level.clone().or_else(|| data_file("ba137_d52.json").filter(|p| p.exists())) {
        Some(p) => LevelModel::from_json(&read(&p)?)?,
        None => LevelModel::ba137_d52(),
    };
    let params = CostParams {
        mechanism: match a.mechanism {
            MechanismArg::Raman => Mechanism::Raman,
            MechanismArg::M1 => Mechanism::M1,
        },
        d: a.d,
        field_t: a.field * GAUSS,
        db_rms_t: a.db_rms_ug * 1e-6 * GAUSS,
        kappa: a.kappa,
        eta: a.eta,
        omega_m: std::f64::consts::TAU * a.motional_mhz * 1e6,
        threshold_rabi_hz: a.threshold_khz * 1e3,
        memory_pairs: match a.memory_pairs {
            MemoryPairsArg::All => MemoryPairs::All,
            MemoryPairsArg::Allowed => MemoryPairs::Allowed,
        },
        ..CostParams::default()
    };
    params.validate()?;
    if let Some(s) = &a.field_sweep {
        let (lo, hi, steps) = parse_sweep(s)?;
        let rows: Vec<SweepRow> = field_sweep(&model, a.n, &params, a.top_k, lo, hi, steps)?;
        return match a.format {
            Format::Json => emit(a.out.as_deref(), &json_bytes(&rows)?),
            Format::Csv => {
                let csv: Vec<SweepCsvRow> = rows
                    .iter()
                    .map(|r| SweepCsvRow {
                        field_g: r.field_g,
                        candidates: r.candidates,
                        median_cost: r.median_cost,
                        min_cost: r.min_cost,
                        max_cost: r.max_cost,
                        median_t_g_us: r.median_t_g * 1e6,
                        min_t_g_us: r.min_t_g * 1e6,
                        max_t_g_us: r.max_t_g * 1e6,
                    })
                    .collect();
                emit(a.out.as_deref(), &csv_bytes(&csv)?)
            }
        };
    }
    let result: SearchResult = search_top_k(&model, a.n, &params, a.top_k)?;
    match a.format {
        Format::Json => emit(a.out.as_deref(), &json_bytes(&result)?),
        Format::Csv => {
            let rows: Vec<CandidateRow> = result.top.iter().enumerate().map(|(k, c)| candidate_row(k + 1, a.field, c)).collect();
            emit(a.out.as_deref(), &csv_bytes(&rows)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_text() {
        let m = parse_matrix("# hadamard-like\n0.5 0, 0.5 0\n0.5 0 -0.5 0.25\n").unwrap();
        assert_eq!(m[(1, 1)], C64::new(-0.5, 0.25));
        assert!(parse_matrix("1 0 0\n0 0 1 0\n").is_err());
        assert!(parse_matrix("1 0 0 0\n").is_err());
        assert!(parse_matrix("").is_err());
    }

    #[test]
    fn sweep_spec() {
        assert_eq!(parse_sweep("0:70:36").unwrap(), (0.0, 70.0, 36));
        for bad in ["1:2", "5:1:3", "0:1:0", "-1:2:3", "a:b:c"] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
