//! Stabilizer tableaux and efficient Bell sampling of stabilizer states.
//!
//! For a stabilizer state `|psi>` there is a Pauli `sigma_g` with
//! `sigma_g |psi> ~ |psi*>`, so Bell outcomes are uniform over the coset
//! `g + span(generators)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{BellOutcome, PauliString};
use crate::simulator::{CircuitSpec, Gate};

/// Tolerance for recognising rotation angles as multiples of `pi/2`.
const ANGLE_TOL: f64 = 1e-9;

/// `N` independent commuting generators with signs (`true` = `-1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n_qubits: usize,
    generators: Vec<PauliString>,
    signs: Vec<bool>,
}

impl StabilizerTableau {
    /// Tableau of `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let generators = (0..n_qubits)
            .map(|q| {
                let mut p = PauliString::identity(n_qubits);
                p.set(q, true, false);
                p
            })
            .collect();
        Self { n_qubits, generators, signs: vec![false; n_qubits] }
    }

    /// Runs a Clifford circuit on `|0...0>`. Rotations must be multiples of `pi/2`.
    pub fn from_circuit(circuit: &CircuitSpec) -> Result<Self> {
        circuit.validate()?;
        let mut t = Self::zero(circuit.n_qubits());
        for (gate, param) in circuit.gates_with_params() {
            t.apply_gate(gate, param)?;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    pub fn apply_h(&mut self, q: usize) {
        for (g, s) in self.generators.iter_mut().zip(&mut self.signs) {
            let (z, x) = (g.z_bit(q), g.x_bit(q));
            *s ^= z && x;
            g.set(q, x, z);
        }
    }

    /// `S = diag(1, -i)`: `X -> -Y`, `Y -> X`.
    pub fn apply_s(&mut self, q: usize) {
        for (g, s) in self.generators.iter_mut().zip(&mut self.signs) {
            let (z, x) = (g.z_bit(q), g.x_bit(q));
            *s ^= x && !z;
            g.set(q, z ^ x, x);
        }
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        for (g, s) in self.generators.iter_mut().zip(&mut self.signs) {
            let (zc, xc, zt, xt) = (g.z_bit(c), g.x_bit(c), g.z_bit(t), g.x_bit(t));
            *s ^= xc && zt && !(xt ^ zc);
            g.set(c, zc ^ zt, xc);
            g.set(t, zt, xt ^ xc);
        }
    }

    /// Applies a Clifford gate; rotations by `k pi/2` are decomposed into `H` and `S`.
    pub fn apply_gate(&mut self, gate: Gate, param: Option<f64>) -> Result<()> {
        if gate.qubits().iter().any(|&q| q >= self.n_qubits) {
            return Err(Error::InvalidInput(format!("{gate:?} outside {} qubits", self.n_qubits)));
        }
        match gate {
            Gate::H { qubit } => self.apply_h(qubit),
            Gate::S { qubit } => self.apply_s(qubit),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::T { .. } => return Err(Error::InvalidInput("T is not a Clifford gate".into())),
            Gate::Ry { qubit } | Gate::Rz { qubit } => {
                let k = quarter_turns(param.unwrap_or(f64::NAN))?;
                for _ in 0..k {
                    if matches!(gate, Gate::Rz { .. }) {
                        // Rz(pi/2) ~ diag(1, i) = S^3.
                        (0..3).for_each(|_| self.apply_s(qubit));
                    } else {
                        // Ry(pi/2) ~ H Z with Z = S^2.
                        self.apply_s(qubit);
                        self.apply_s(qubit);
                        self.apply_h(qubit);
                    }
                }
            }
        }
        Ok(())
    }

    /// Pauli `g` with `sigma_g |psi> ~ |psi*>`.
    ///
    /// Solves `<g, s_i> = #Y(s_i) mod 2` for every generator `s_i`; free
    /// variables are set to zero, which makes `g` unique for a given tableau.
    pub fn conjugation_offset(&self) -> PauliString {
        let n = self.n_qubits;
        let cols = 2 * n;
        // Unknown layout: bits 0..n are g.z, bits n..2n are g.x.
        let mut rows: Vec<(Vec<bool>, bool)> = self
            .generators
            .iter()
            .map(|s| {
                let mut row = vec![false; cols];
                for q in 0..n {
                    row[q] = s.x_bit(q);
                    row[n + q] = s.z_bit(q);
                }
                (row, s.y_count() % 2 == 1)
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].0[c]) else { continue };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.0[c] {
                    for (a, b) in row.0.iter_mut().zip(&pivot.0) {
                        *a ^= b;
                    }
                    row.1 ^= pivot.1;
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut g = PauliString::identity(n);
        for (row, &c) in rows.iter().zip(&pivots) {
            if row.1 {
                let q = c % n;
                if c < n {
                    g.set(q, true, g.x_bit(q));
                } else {
                    g.set(q, g.z_bit(q), true);
                }
            }
        }
        g
    }

    /// Draws Bell outcomes uniformly from `g + span(generators)`.
    pub fn bell_sample<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> Vec<BellOutcome> {
        let g = self.conjugation_offset();
        (0..n_samples)
            .map(|_| {
                let mut out = g.clone();
                for s in &self.generators {
                    if rng.gen::<bool>() {
                        out ^= s;
                    }
                }
                out
            })
            .collect()
    }
}

fn quarter_turns(angle: f64) -> Result<usize> {
    let k = (angle / FRAC_PI_2).round();
    if !angle.is_finite() || (angle - k * FRAC_PI_2).abs() > ANGLE_TOL {
        return Err(Error::InvalidInput(format!("rotation angle {angle} is not a multiple of pi/2")));
    }
    Ok(k.rem_euclid(4.0) as usize)
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, s) in self.generators.iter().zip(&self.signs) {
            writeln!(f, "{}{}", if *s { '-' } else { '+' }, g)?;
        }
        Ok(())
    }
}

impl FromStr for StabilizerTableau {
    type Err = Error;

    /// Parses one signed generator per line; commutation and independence are checked.
    fn from_str(s: &str) -> Result<Self> {
        let mut generators = Vec::new();
        let mut signs = Vec::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (sign, letters) = line.split_at(1);
            signs.push(match sign {
                "+" => false,
                "-" => true,
                _ => return Err(Error::Parse(format!("generator {line:?} lacks a sign"))),
            });
            generators.push(letters.parse::<PauliString>()?);
        }
        let n_qubits = generators.len();
        if n_qubits == 0 || generators.iter().any(|g| g.num_qubits() != n_qubits) {
            return Err(Error::Parse("need N generators on N qubits".into()));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if crate::pauli::symplectic_product(a, b) == 1 {
                    return Err(Error::Parse(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        if gf2_rank(&generators) != n_qubits {
            return Err(Error::Parse("generators are not independent".into()));
        }
        Ok(Self { n_qubits, generators, signs })
    }
}

fn gf2_rank(rows: &[PauliString]) -> usize {
    let mut basis: Vec<PauliString> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for b in &basis {
            let lead = leading_bit(b).expect("basis vectors are non-zero");
            if bit_at(&v, lead) {
                v ^= b;
            }
        }
        if !v.is_identity() {
            basis.push(v);
            basis.sort_by_key(|b| std::cmp::Reverse(leading_bit(b)));
        }
    }
    basis.len()
}

fn bit_at(p: &PauliString, i: usize) -> bool {
    let n = p.num_qubits();
    if i < n { p.z_bit(i) } else { p.x_bit(i - n) }
}

fn leading_bit(p: &PauliString) -> Option<usize> {
    (0..2 * p.num_qubits()).rev().find(|&i| bit_at(p, i))
}

/// The 24 single-qubit Clifford elements (mod phase) as words in `H` and `S`.
fn single_qubit_cliffords() -> &'static [Vec<Gate>] {
    static WORDS: OnceLock<Vec<Vec<Gate>>> = OnceLock::new();
    WORDS.get_or_init(|| {
        let mut seen: Vec<StabilizerAction> = Vec::new();
        let mut words: Vec<Vec<Gate>> = Vec::new();
        let mut frontier: Vec<Vec<Gate>> = vec![Vec::new()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in frontier {
                let action = StabilizerAction::of(&w);
                if seen.contains(&action) {
                    continue;
                }
                seen.push(action);
                for g in [Gate::H { qubit: 0 }, Gate::S { qubit: 0 }] {
                    let mut longer = w.clone();
                    longer.push(g);
                    next.push(longer);
                }
                words.push(w);
            }
            frontier = next;
        }
        debug_assert_eq!(words.len(), 24);
        words
    })
}

/// Images of `+X` and `+Z` under a single-qubit word.
#[derive(PartialEq, Eq)]
struct StabilizerAction([(bool, bool, bool); 2]);

impl StabilizerAction {
    fn of(word: &[Gate]) -> Self {
        let image = |z: bool, x: bool| {
            let mut t = StabilizerTableau {
                n_qubits: 1,
                generators: vec![PauliString::from_bits(&[z], &[x]).unwrap()],
                signs: vec![false],
            };
            for &g in word {
                t.apply_gate(g, None).unwrap();
            }
            (t.signs[0], t.generators[0].z_bit(0), t.generators[0].x_bit(0))
        };
        Self([image(false, true), image(true, false)])
    }
}

/// Layered random Clifford circuit: per layer a uniformly random single-qubit
/// Clifford on every qubit followed by a CNOT chain. Returns the tableau of
/// the circuit applied to `|0...0>` and the circuit itself.
pub fn random_clifford<R: Rng + ?Sized>(
    n_qubits: usize,
    depth: usize,
    rng: &mut R,
) -> Result<(StabilizerTableau, CircuitSpec)> {
    let circuit = random_clifford_circuit(n_qubits, depth, rng);
    Ok((StabilizerTableau::from_circuit(&circuit)?, circuit))
}

pub fn random_clifford_circuit<R: Rng + ?Sized>(n_qubits: usize, depth: usize, rng: &mut R) -> CircuitSpec {
    let words = single_qubit_cliffords();
    let mut c = CircuitSpec::empty(n_qubits);
    for _ in 0..depth {
        for q in 0..n_qubits {
            for g in &words[rng.gen_range(0..words.len())] {
                c.push(match *g {
                    Gate::H { .. } => Gate::H { qubit: q },
                    _ => Gate::S { qubit: q },
                });
            }
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.push(Gate::Cnot { control: q, target: q + 1 });
        }
    }
    c
}

/// Default number of layers in [`random_clifford`].
pub const DEFAULT_CLIFFORD_DEPTH: usize = 4;
