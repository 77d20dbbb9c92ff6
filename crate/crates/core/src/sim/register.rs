use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bijection from an ion's level index to an n-bit label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingMap {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl EncodingMap {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let d = perm.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Register(format!("encoding over {d} levels, need a power of two >= 2")));
        }
        let mut inv = vec![usize::MAX; d];
        for (level, &label) in perm.iter().enumerate() {
            if label >= d || inv[label] != usize::MAX {
                return Err(Error::Register(format!("encoding {perm:?} is not a bijection")));
            }
            inv[label] = level;
        }
        Ok(Self { perm, inv })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new((0..d).collect())
    }

    /// Level index written in binary.
    pub fn m1(d: usize) -> Result<Self> {
        Self::identity(d)
    }

    /// 0→00, 1→11, 2→01, 3→10.
    pub fn m2() -> Self {
        Self::new(vec![0b00, 0b11, 0b01, 0b10]).expect("static map")
    }

    pub fn d(&self) -> usize {
        self.perm.len()
    }

    pub fn bits(&self) -> usize {
        self.perm.len().trailing_zeros() as usize
    }

    pub fn label(&self, level: usize) -> usize {
        self.perm[level]
    }

    pub fn level(&self, label: usize) -> usize {
        self.inv[label]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Label of `level` as a bit string, most significant bit first.
    pub fn label_string(&self, level: usize) -> Result<String> {
        if level >= self.d() {
            return Err(Error::Register(format!("level {level} out of range for d={}", self.d())));
        }
        let n = self.bits();
        let l = self.perm[level];
        Ok((0..n).rev().map(|b| if (l >> b) & 1 == 1 { '1' } else { '0' }).collect())
    }

    pub fn level_of(&self, bits: &str) -> Result<usize> {
        if bits.len() != self.bits() {
            return Err(Error::Register(format!("label '{bits}' has wrong width")));
        }
        let label = usize::from_str_radix(bits, 2).map_err(|_| Error::Register(format!("label '{bits}' is not binary")))?;
        Ok(self.inv[label])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QubitOrder {
    /// Qubit 1 of an ion is the most significant label bit.
    #[default]
    MsbFirst,
    LsbFirst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IonSpec {
    pub d: usize,
    pub allowed_r: Vec<(usize, usize)>,
    pub encoding: EncodingMap,
}

impl IonSpec {
    pub fn new(d: usize, allowed_r: Vec<(usize, usize)>, encoding: EncodingMap) -> Result<Self> {
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Register(format!("level count {d} is not a power of two >= 2")));
        }
        if encoding.d() != d {
            return Err(Error::Register(format!("encoding covers {} levels, ion has {d}", encoding.d())));
        }
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(allowed_r.len());
        for (a, b) in allowed_r {
            let (a, b) = (a.min(b), a.max(b));
            if a == b || b >= d {
                return Err(Error::Register(format!("pair ({a},{b}) invalid for d={d}")));
            }
            if pairs.contains(&(a, b)) {
                return Err(Error::Register(format!("duplicate pair ({a},{b})")));
            }
            pairs.push((a, b));
        }
        Ok(Self { d, allowed_r: pairs, encoding })
    }

    pub fn all_to_all(d: usize, encoding: EncodingMap) -> Result<Self> {
        let pairs = all_pairs(d);
        Self::new(d, pairs, encoding)
    }

    /// All-to-all ion under the binary map.
    pub fn qudit(d: usize) -> Result<Self> {
        Self::all_to_all(d, EncodingMap::m1(d)?)
    }

    pub fn n(&self) -> usize {
        self.encoding.bits()
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.allowed_r.contains(&key)
    }

    pub fn is_connected(&self) -> bool {
        graph_connected(self.d, &self.allowed_r)
    }

    pub fn map_basis(&self, level: usize) -> Result<String> {
        self.encoding.label_string(level)
    }
}

pub fn all_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            v.push((a, b));
        }
    }
    v
}

pub fn graph_connected(d: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; d];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Ordered ion chain. Basis index is mixed-radix with ion 0 varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    ions: Vec<IonSpec>,
    strides: Vec<usize>,
    dim: usize,
    order: QubitOrder,
    qubits: Vec<(usize, usize)>,
    first_qubit: Vec<usize>,
}

impl Register {
    pub fn build(ions: Vec<IonSpec>) -> Result<Self> {
        Self::with_order(ions, QubitOrder::MsbFirst)
    }

    pub fn with_order(ions: Vec<IonSpec>, order: QubitOrder) -> Result<Self> {
        if ions.is_empty() {
            return Err(Error::Register("no ions".into()));
        }
        let mut strides = Vec::with_capacity(ions.len());
        let mut dim: usize = 1;
        let mut qubits = Vec::new();
        let mut first_qubit = Vec::with_capacity(ions.len());
        for (i, ion) in ions.iter().enumerate() {
            if ion.encoding.d() != ion.d {
                return Err(Error::Register(format!("ion {i}: encoding size mismatch")));
            }
            strides.push(dim);
            dim = dim.checked_mul(ion.d).filter(|&x| x <= 1 << 30).ok_or_else(|| Error::Register("register too large".into()))?;
            first_qubit.push(qubits.len());
            for k in 0..ion.n() {
                qubits.push((i, k));
            }
        }
        Ok(Self { ions, strides, dim, order, qubits, first_qubit })
    }

    /// L identical all-to-all ions under the binary map.
    pub fn uniform(l: usize, d: usize) -> Result<Self> {
        Self::build((0..l).map(|_| IonSpec::qudit(d)).collect::<Result<Vec<_>>>()?)
    }

    pub fn ions(&self) -> &[IonSpec] {
        &self.ions
    }

    pub fn ion(&self, i: usize) -> &IonSpec {
        &self.ions[i]
    }

    pub fn len(&self) -> usize {
        self.ions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn stride(&self, ion: usize) -> usize {
        self.strides[ion]
    }

    pub fn order(&self) -> QubitOrder {
        self.order
    }

    pub fn set_order(&mut self, order: QubitOrder) {
        self.order = order;
    }

    /// Global qubit index → (ion, qubit within ion).
    pub fn qubit(&self, q: usize) -> (usize, usize) {
        self.qubits[q]
    }

    pub fn global_qubit(&self, ion: usize, k: usize) -> usize {
        self.first_qubit[ion] + k
    }

    /// Bit position of in-ion qubit `k` inside the ion's label.
    pub fn bit_position(&self, ion: usize, k: usize) -> usize {
        let n = self.ions[ion].n();
        match self.order {
            QubitOrder::MsbFirst => n - 1 - k,
            QubitOrder::LsbFirst => k,
        }
    }

    pub fn digit(&self, index: usize, ion: usize) -> usize {
        (index / self.strides[ion]) % self.ions[ion].d
    }

    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.ions.len()).map(|i| self.digit(index, i)).collect()
    }

    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.ions.len() {
            return Err(Error::Register("level list length mismatch".into()));
        }
        let mut idx = 0;
        for (i, &l) in levels.iter().enumerate() {
            if l >= self.ions[i].d {
                return Err(Error::Register(format!("level {l} out of range on ion {i}")));
            }
            idx += l * self.strides[i];
        }
        Ok(idx)
    }

    /// Value of global qubit `q` in basis state `index`.
    pub fn qubit_value(&self, index: usize, q: usize) -> usize {
        let (ion, k) = self.qubits[q];
        let label = self.ions[ion].encoding.label(self.digit(index, ion));
        (label >> self.bit_position(ion, k)) & 1
    }

    /// Computational word of a basis state, global qubit 0 most significant.
    pub fn qubit_word(&self, index: usize) -> usize {
        let n = self.qubits.len();
        (0..n).fold(0, |w, q| w | (self.qubit_value(index, q) << (n - 1 - q)))
    }

    /// Inverse of [`Register::qubit_word`] over the whole basis.
    pub fn word_table(&self) -> Vec<usize> {
        let mut t = vec![0; self.dim];
        for idx in 0..self.dim {
            t[self.qubit_word(idx)] = idx;
        }
        t
    }

    /// Bit-string label of a basis state, qubit 0 first.
    pub fn label(&self, index: usize) -> String {
        (0..self.qubits.len()).map(|q| if self.qubit_value(index, q) == 1 { '1' } else { '0' }).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonConfig {
    pub d: usize,
    #[serde(default)]
    pub map: Option<Vec<usize>>,
    #[serde(default)]
    pub allowed_r: Option<Vec<[usize; 2]>>,
}

/// JSON register description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterConfig {
    pub ions: Vec<IonConfig>,
    #[serde(default)]
    pub qubit_order: QubitOrder,
}

impl RegisterConfig {
    pub fn build(&self) -> Result<Register> {
        let mut ions = Vec::with_capacity(self.ions.len());
        for (i, c) in self.ions.iter().enumerate() {
            let enc = match &c.map {
                Some(p) => EncodingMap::new(p.clone()),
                None => EncodingMap::identity(c.d),
            }
            .map_err(|e| Error::Register(format!("ions[{i}].map: {e}")))?;
            let pairs = match &c.allowed_r {
                Some(p) => p.iter().map(|x| (x[0], x[1])).collect(),
                None => all_pairs(c.d),
            };
            ions.push(IonSpec::new(c.d, pairs, enc).map_err(|e| Error::Register(format!("ions[{i}]: {e}")))?);
        }
        Register::with_order(ions, self.qubit_order)
    }

    pub fn from_register(reg: &Register) -> Self {
        Self {
            ions: reg
                .ions()
                .iter()
                .map(|ion| IonConfig {
                    d: ion.d,
                    map: Some(ion.encoding.perm().to_vec()),
                    allowed_r: Some(ion.allowed_r.iter().map(|&(a, b)| [a, b]).collect()),
                })
                .collect(),
            qubit_order: reg.order(),
        }
    }
}
