//! Machine-readable decomposition tables and their audit.
//!
//! Each row is checked under both composition orders and both in-ion qubit
//! orders. Rows that fail everywhere get an independently synthesized
//! replacement no longer than the printed sequence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::exact::{block_path, synthesize_exact, ExactOptions};
use super::expr::eval_angle;
use super::variational::{optimize_slots, pulse_search, SlotSpec};
use super::{CompositionOrder, PulseSequence};
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, hadamard, kron, pauli, phase_distance, CMat};
use crate::sim::{all_pairs, circuit_unitary, embed_standard, text::format_gate, EncodingMap, IonSpec, NativeGate, QubitOrder, Register};

const PASS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub version: u32,
    pub parameters: BTreeMap<String, f64>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub table: String,
    pub row: String,
    /// Level count per ion.
    pub ions: Vec<usize>,
    /// Encoding map of the d = 4 ions: "M1" or "M2".
    pub map: String,
    /// Transition graph of ion 0 when it is not all-to-all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_r: Option<Vec<(usize, usize)>>,
    pub target: TargetSpec,
    /// Gates as printed; a level written `?` is unreadable in the source.
    pub seq: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Coef {
    Num(f64),
    Expr(String),
}

/// Target operation on global qubits. Global qubits enumerate ion 0's qubits first.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "op", deny_unknown_fields)]
pub enum TargetSpec {
    X {
        q: Vec<usize>,
    },
    H {
        q: Vec<usize>,
    },
    /// q = [control, target].
    #[serde(rename = "CNOT")]
    Cnot {
        q: Vec<usize>,
    },
    /// exp(−i·angle·Σ coef·P).
    #[serde(rename = "exp")]
    Exp {
        angle: String,
        terms: Vec<(Coef, String, Vec<usize>)>,
    },
    /// Matrix product as written (rightmost acts first).
    #[serde(rename = "product")]
    Product {
        of: Vec<TargetSpec>,
    },
}

/// `op` on qubits `qs` of an n-qubit word space, qubit 0 most significant.
fn on_qubits(op: &CMat, qs: &[usize], n: usize) -> Result<CMat> {
    let k = qs.len();
    if op.nrows() != 1 << k || qs.iter().any(|&q| q >= n) {
        return Err(Error::Data(format!("operator of size {} on qubits {qs:?} of {n}", op.nrows())));
    }
    let shifts: Vec<usize> = qs.iter().map(|&q| n - 1 - q).collect();
    let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let tc = shifts.iter().fold(0, |acc, &s| (acc << 1) | ((col >> s) & 1));
        for tr in 0..(1usize << k) {
            let row = shifts.iter().enumerate().fold(col & !mask, |acc, (m, &s)| acc | (((tr >> (k - 1 - m)) & 1) << s));
            out[(row, col)] = op[(tr, tc)];
        }
    }
    Ok(out)
}

impl TargetSpec {
    /// 2^n-dimensional matrix, qubit 0 most significant.
    pub fn matrix(&self, n: usize, vars: &BTreeMap<String, f64>) -> Result<CMat> {
        match self {
            TargetSpec::X { q } => on_qubits(&pauli('X'), q, n),
            TargetSpec::H { q } => on_qubits(&hadamard(), q, n),
            TargetSpec::Cnot { q } => {
                let mut m = CMat::identity(4, 4);
                m.swap_rows(2, 3);
                on_qubits(&m, q, n)
            }
            TargetSpec::Exp { angle, terms } => {
                let t = eval_angle(angle, vars)?;
                let dim = 1usize << n;
                let mut h = CMat::zeros(dim, dim);
                for (coef, paulis, qs) in terms {
                    let c = match coef {
                        Coef::Num(x) => *x,
                        Coef::Expr(s) => eval_angle(s, vars)?,
                    };
                    if paulis.chars().count() != qs.len() {
                        return Err(Error::Data(format!("Pauli string '{paulis}' does not match qubits {qs:?}")));
                    }
                    let mut op = CMat::identity(1, 1);
                    for ch in paulis.chars() {
                        op = kron(&op, &pauli(ch));
                    }
                    h += on_qubits(&op, qs, n)? * crate::linalg::c(c, 0.0);
                }
                Ok(expm_hermitian(&h, t))
            }
            TargetSpec::Product { of } => {
                let dim = 1usize << n;
                let mut m = CMat::identity(dim, dim);
                for f in of {
                    m *= f.matrix(n, vars)?;
                }
                Ok(m)
            }
        }
    }

    /// Pauli terms when every term is a pure X string with a numeric weight.
    fn x_terms(&self, vars: &BTreeMap<String, f64>) -> Option<Vec<(f64, Vec<usize>)>> {
        let TargetSpec::Exp { angle, terms } = self else { return None };
        let t = eval_angle(angle, vars).ok()?;
        terms
            .iter()
            .map(|(coef, p, qs)| {
                let c = match coef {
                    Coef::Num(x) => *x,
                    Coef::Expr(s) => eval_angle(s, vars).ok()?,
                };
                p.chars().all(|ch| ch == 'X').then(|| (c * t, qs.clone()))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convention {
    pub order: CompositionOrder,
    pub qubit_order: QubitOrder,
}

impl Convention {
    pub fn all() -> [Convention; 4] {
        use CompositionOrder::*;
        use QubitOrder::*;
        [
            Convention { order: LeftmostFirst, qubit_order: MsbFirst },
            Convention { order: LeftmostLast, qubit_order: MsbFirst },
            Convention { order: LeftmostFirst, qubit_order: LsbFirst },
            Convention { order: LeftmostLast, qubit_order: LsbFirst },
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionStatus {
    pub convention: Convention,
    /// None when the printed sequence is not a legal gate list.
    pub distance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Alternative {
    pub method: String,
    pub sequence: Vec<String>,
    pub length: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableAuditEntry {
    pub table: String,
    pub row: String,
    pub target: TargetSpec,
    pub paper_sequence: Vec<String>,
    pub statuses: Vec<ConventionStatus>,
    pub best_distance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<Alternative>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Longest single-ion pulse sequence tried by exhaustive pair search.
    pub search_depth: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { restarts: 8, sweeps: 600, seed: 2024, search_depth: 3 }
    }
}

pub fn builtin_tables() -> TableFile {
    serde_json::from_str(include_str!("../../../../data/tables.json")).expect("bundled tables parse")
}

pub fn load_tables(src: &str) -> Result<TableFile> {
    serde_json::from_str(src).map_err(|e| Error::Data(format!("tables: {e}")))
}

/// One printed gate. `None` levels are unreadable.
#[derive(Clone, Debug)]
enum RawGate {
    R { ion: usize, a: Option<usize>, b: Option<usize>, theta: f64, phi: f64 },
    Ms { ion_i: usize, ion_j: usize, levels: [usize; 4], coupling: f64 },
}

fn parse_row_gate(s: &str, vars: &BTreeMap<String, f64>) -> Result<RawGate> {
    let f: Vec<&str> = s.split_whitespace().collect();
    let idx = |t: &str| t.parse::<usize>().map_err(|_| Error::Data(format!("bad index '{t}' in '{s}'")));
    let lvl = |t: &str| if t == "?" { Ok(None) } else { idx(t).map(Some) };
    match (f.first().copied(), f.len()) {
        (Some("R"), 6) => {
            Ok(RawGate::R { ion: idx(f[1])?, a: lvl(f[2])?, b: lvl(f[3])?, theta: eval_angle(f[4], vars)?, phi: eval_angle(f[5], vars)? })
        }
        (Some("MS"), 8) => Ok(RawGate::Ms {
            ion_i: idx(f[1])?,
            ion_j: idx(f[2])?,
            levels: [idx(f[3])?, idx(f[4])?, idx(f[5])?, idx(f[6])?],
            coupling: eval_angle(f[7], vars)?,
        }),
        _ => Err(Error::Data(format!("unrecognised gate '{s}'"))),
    }
}

/// Every reading of the printed gates, filling unreadable levels with each value.
fn completions(raw: &[RawGate], reg: &Register) -> Vec<(Vec<NativeGate>, Vec<String>)> {
    let mut out: Vec<(Vec<NativeGate>, Vec<String>)> = vec![(Vec::new(), Vec::new())];
    for g in raw {
        let options: Vec<(NativeGate, Option<String>)> = match *g {
            RawGate::R { ion, a, b, theta, phi } => {
                let d = reg.ions().get(ion).map_or(0, |s| s.d);
                let fill = |x: Option<usize>| x.map_or_else(|| (0..d).collect::<Vec<_>>(), |v| vec![v]);
                let mut v = Vec::new();
                for aa in fill(a) {
                    for bb in fill(b) {
                        if (a.is_none() || b.is_none()) && aa == bb {
                            continue;
                        }
                        let note = (a.is_none() || b.is_none()).then(|| format!("unreadable level read as R {ion} {aa} {bb}"));
                        v.push((NativeGate::r(ion, aa, bb, theta, phi), note));
                    }
                }
                v
            }
            RawGate::Ms { ion_i, ion_j, levels: [a, b, c, e], coupling } => {
                vec![(NativeGate::ms(ion_i, ion_j, (a, b), (c, e), coupling), None)]
            }
        };
        let mut next = Vec::new();
        for (gates, notes) in &out {
            for (g, note) in &options {
                let mut gs = gates.clone();
                gs.push(g.clone());
                let mut ns = notes.clone();
                ns.extend(note.clone());
                next.push((gs, ns));
            }
        }
        out = next;
    }
    out
}

fn row_register(row: &TableRow, order: QubitOrder) -> Result<Register> {
    let mut ions = Vec::new();
    for (k, &d) in row.ions.iter().enumerate() {
        let enc = match (d, row.map.as_str()) {
            (4, "M2") => EncodingMap::m2(),
            (_, "M1") | (_, "M2") => EncodingMap::m1(d)?,
            (_, other) => return Err(Error::Data(format!("unknown map '{other}'"))),
        };
        let pairs = match (&row.allowed_r, k) {
            (Some(p), 0) => p.clone(),
            _ => all_pairs(d),
        };
        ions.push(IonSpec::new(d, pairs, enc)?);
    }
    Register::with_order(ions, order)
}

fn row_target(row: &TableRow, reg: &Register, vars: &BTreeMap<String, f64>) -> Result<CMat> {
    let n = reg.num_qubits();
    let m = row.target.matrix(n, vars)?;
    embed_standard(&m, &(0..n).collect::<Vec<_>>(), reg)
}

fn legal(reg: &Register, gates: &[NativeGate]) -> bool {
    gates.iter().all(|g| g.validate(reg).is_ok() && g.respects_connectivity(reg))
}

fn texts(gates: &[NativeGate]) -> Vec<String> {
    gates.iter().map(format_gate).collect()
}

/// Audit every row; FAIL rows receive an alternative when one is found.
pub fn run_table_suite(tables: &TableFile, opts: AuditOptions) -> Result<Vec<TableAuditEntry>> {
    let vars = &tables.parameters;
    let mut entries = Vec::new();
    // verified sequences of passing rows, in the canonical convention
    let mut solved: Vec<(usize, Vec<NativeGate>)> = Vec::new();
    for (ri, row) in tables.rows.iter().enumerate() {
        let raw: Vec<RawGate> = row.seq.iter().map(|s| parse_row_gate(s, vars)).collect::<Result<_>>()?;
        let mut statuses = Vec::new();
        let mut notes = Vec::new();
        let mut canonical: Option<Vec<NativeGate>> = None;
        for conv in Convention::all() {
            let reg = row_register(row, conv.qubit_order)?;
            let target = row_target(row, &reg, vars)?;
            let mut best: Option<(f64, Vec<NativeGate>, Vec<String>)> = None;
            for (gates, ns) in completions(&raw, &reg) {
                if !legal(&reg, &gates) {
                    continue;
                }
                let seq = PulseSequence::with_order(gates, conv.order);
                let d = phase_distance(&target, &seq.unitary(&reg));
                if best.as_ref().is_none_or(|b| d < b.0) {
                    best = Some((d, seq.applied(), ns));
                }
            }
            let pass = best.as_ref().is_some_and(|b| b.0 <= PASS_TOL);
            if pass && conv.qubit_order == QubitOrder::MsbFirst && canonical.is_none() {
                canonical = best.as_ref().map(|b| b.1.clone());
            }
            if pass {
                for n in &best.as_ref().expect("pass implies a reading").2 {
                    if !notes.contains(n) {
                        notes.push(n.clone());
                    }
                }
            }
            statuses.push(ConventionStatus { convention: conv, distance: best.map(|b| b.0), pass });
        }
        if raw.iter().zip(&row.seq).any(|(g, _)| matches!(g, RawGate::R { a: None, .. } | RawGate::R { b: None, .. })) && notes.is_empty() {
            notes.push("sequence contains an unreadable level".into());
        }
        let base = row_register(row, QubitOrder::MsbFirst)?;
        if completions(&raw, &base).iter().all(|(g, _)| !legal(&base, g)) {
            notes.push("printed sequence is not a legal gate list".into());
        }
        let pass = statuses.iter().any(|s| s.pass);
        let best_distance = statuses.iter().filter_map(|s| s.distance).min_by(f64::total_cmp);
        if let Some(g) = canonical {
            solved.push((ri, g));
        }
        entries.push(TableAuditEntry {
            table: row.table.clone(),
            row: row.row.clone(),
            target: row.target.clone(),
            paper_sequence: row.seq.clone(),
            statuses,
            best_distance,
            pass,
            alternative: None,
            notes,
        });
    }
    for (ri, row) in tables.rows.iter().enumerate() {
        if entries[ri].pass {
            continue;
        }
        entries[ri].alternative = find_alternative(tables, ri, &solved, opts)?;
        if entries[ri].alternative.is_none() {
            entries[ri].notes.push(format!("no alternative of length <= {} found", row.seq.len()));
        }
    }
    Ok(entries)
}

fn accept(reg: &Register, target: &CMat, gates: Vec<NativeGate>, limit: usize, method: &str) -> Option<Alternative> {
    if gates.len() > limit || !legal(reg, &gates) {
        return None;
    }
    let d = phase_distance(target, &circuit_unitary(reg, &gates));
    (d <= PASS_TOL).then(|| Alternative { method: method.into(), sequence: texts(&gates), length: gates.len(), distance: d })
}

fn shortest(cands: impl IntoIterator<Item = Option<Alternative>>) -> Option<Alternative> {
    cands.into_iter().flatten().min_by_key(|a| a.length)
}

/// Candidate replacements in the canonical convention: first listed gate acts
/// first, first virtual qubit of an ion is its most significant bit.
fn find_alternative(tables: &TableFile, ri: usize, solved: &[(usize, Vec<NativeGate>)], opts: AuditOptions) -> Result<Option<Alternative>> {
    let row = &tables.rows[ri];
    let vars = &tables.parameters;
    let reg = row_register(row, QubitOrder::MsbFirst)?;
    let target = row_target(row, &reg, vars)?;
    let limit = row.seq.len();

    let mut cheap = Vec::new();
    if reg.len() == 1 {
        if let Ok(rep) = synthesize_exact(&target, reg.ion(0), ExactOptions::default()) {
            cheap.push(accept(&reg, &target, rep.sequence.gates, limit, "exact"));
        }
        if let Some(g) = block_path(&target, reg.ion(0)) {
            cheap.push(accept(&reg, &target, g, limit, "block"));
        }
    }
    if let Some(g) = x_exponential(&row.target, &reg, vars) {
        cheap.push(accept(&reg, &target, g, limit, "commuting-x"));
    }
    for (si, gates) in solved {
        let other = &tables.rows[*si];
        if other.ions != row.ions || other.map != row.map || other.allowed_r != row.allowed_r {
            continue;
        }
        for g in relabelings(&reg, gates) {
            cheap.push(accept(&reg, &target, g, limit, &format!("relabel of table {} row {}", other.table, other.row)));
        }
    }
    if let Some(a) = shortest(cheap) {
        return Ok(Some(a));
    }

    // re-optimise the printed template, replacing illegal slots by legal pairs
    let raw: Vec<RawGate> = row.seq.iter().map(|s| parse_row_gate(s, vars)).collect::<Result<_>>()?;
    for (tpl, init) in templates(&raw, &reg) {
        let (p, d) = optimize_slots(&reg, &target, &tpl, Some(&init), opts.restarts, opts.sweeps, opts.seed)?;
        if d <= PASS_TOL {
            let gates = instantiate(&tpl, &p);
            if let Some(a) = accept(&reg, &target, gates, limit, "template re-optimisation") {
                return Ok(Some(a));
            }
        }
    }

    if reg.len() == 1 {
        let depth = opts.search_depth.min(limit);
        if let Some(g) = pulse_search(&reg, &target, depth, opts.restarts.min(4), opts.sweeps, opts.seed)? {
            return Ok(accept(&reg, &target, g, limit, "pulse search"));
        }
    }
    Ok(None)
}

fn instantiate(slots: &[SlotSpec], params: &[f64]) -> Vec<NativeGate> {
    let mut o = 0;
    slots
        .iter()
        .map(|s| {
            let g = s.gate(&params[o..o + s.n_params()]);
            o += s.n_params();
            g
        })
        .collect()
}

/// Slot lists from printed gates; an illegal R slot is tried on every legal pair of its ion.
fn templates(raw: &[RawGate], reg: &Register) -> Vec<(Vec<SlotSpec>, Vec<f64>)> {
    let mut out: Vec<(Vec<SlotSpec>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
    for g in raw {
        let options: Vec<(SlotSpec, Vec<f64>)> = match *g {
            RawGate::R { ion, a, b, theta, phi } => {
                let ok = |x: usize, y: usize| ion < reg.len() && x != y && reg.ion(ion).allows(x.min(y), x.max(y));
                match (a, b) {
                    (Some(x), Some(y)) if ok(x, y) => vec![(SlotSpec::R { ion, a: x.min(y), b: x.max(y) }, vec![theta, phi])],
                    _ if ion < reg.len() => {
                        reg.ion(ion).allowed_r.iter().map(|&(x, y)| (SlotSpec::R { ion, a: x, b: y }, vec![theta, phi])).collect()
                    }
                    _ => return Vec::new(),
                }
            }
            RawGate::Ms { ion_i, ion_j, levels: [a, b, c, e], coupling } => {
                let g = NativeGate::ms(ion_i, ion_j, (a, b), (c, e), coupling);
                if !legal(reg, std::slice::from_ref(&g)) {
                    return Vec::new();
                }
                vec![(SlotSpec::Ms { ion_i, ion_j, pair_i: (a.min(b), a.max(b)), pair_j: (c.min(e), c.max(e)) }, vec![coupling])]
            }
        };
        let mut next = Vec::new();
        for (slots, init) in &out {
            for (s, p) in &options {
                let mut ss = slots.clone();
                ss.push(s.clone());
                let mut pp = init.clone();
                pp.extend(p);
                next.push((ss, pp));
            }
        }
        out = next;
    }
    out
}

/// Level permutation of one ion induced by permuting its virtual qubits.
fn qubit_perm_levels(enc: &EncodingMap, qperm: &[usize]) -> Vec<usize> {
    let n = enc.bits();
    (0..enc.d())
        .map(|lvl| {
            let label = enc.label(lvl);
            let mut out = 0;
            for (k, &src) in qperm.iter().enumerate() {
                let bit = (label >> (n - 1 - src)) & 1;
                out |= bit << (n - 1 - k);
            }
            enc.level(out)
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The gate list under every combination of in-ion qubit permutations.
fn relabelings(reg: &Register, gates: &[NativeGate]) -> Vec<Vec<NativeGate>> {
    let mut out = vec![gates.to_vec()];
    for ion in 0..reg.len() {
        let enc = &reg.ion(ion).encoding;
        let mut next = Vec::new();
        for seq in &out {
            for qp in permutations(enc.bits()) {
                let perm = qubit_perm_levels(enc, &qp);
                next.push(seq.iter().map(|g| g.relabel(ion, &perm)).collect());
            }
        }
        out = next;
    }
    out
}

/// Levels of `ion` in the global X-string support `qs`, as disjoint flipped pairs.
fn flip_pairs(reg: &Register, ion: usize, qs: &[usize]) -> Vec<(usize, usize)> {
    let spec = reg.ion(ion);
    let mut mask = 0usize;
    for &q in qs {
        let (i, k) = reg.qubit(q);
        if i == ion {
            mask |= 1 << (reg.bit_position(ion, k));
        }
    }
    let mut pairs = Vec::new();
    for lvl in 0..spec.d {
        let other = spec.encoding.level(spec.encoding.label(lvl) ^ mask);
        if lvl < other {
            pairs.push((lvl, other));
        }
    }
    pairs
}

/// Commuting X-string exponentials as R pulses (one ion) or MS gates (two ions).
fn x_exponential(spec: &TargetSpec, reg: &Register, vars: &BTreeMap<String, f64>) -> Option<Vec<NativeGate>> {
    let terms = spec.x_terms(vars)?;
    let mut gates = Vec::new();
    for (angle, qs) in terms {
        let ions: Vec<usize> = {
            let mut v: Vec<usize> = qs.iter().map(|&q| reg.qubit(q).0).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        match ions.as_slice() {
            [i] => {
                for (a, b) in flip_pairs(reg, *i, &qs) {
                    gates.push(NativeGate::r(*i, a, b, angle, 0.0));
                }
            }
            [i, j] => {
                for pi in flip_pairs(reg, *i, &qs) {
                    for pj in flip_pairs(reg, *j, &qs) {
                        gates.push(NativeGate::ms(*i, *j, pi, pj, angle));
                    }
                }
            }
            _ => return None,
        }
    }
    Some(gates)
}
