//! Timed gate-level circuits and the pattern constructors.
//!
//! Every pattern follows the same pseudo-identity template: a preparation
//! unitary, an idle window of length tau (optionally split by a refocusing X),
//! the inverse of the preparation, and a measurement of every qubit.
//!
//! X, H and CX are instantaneous events at their `at_ns` time; decoherence
//! acts in the gaps between events. DELAY gates mark idle windows explicitly
//! and carry their length.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Bipartition, ChipTopology, PairLayout, TripletCover};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    Cx,
    Delay,
    Measure,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Cx => "CX",
            GateKind::Delay => "DELAY",
            GateKind::Measure => "MEASURE",
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(self, GateKind::X | GateKind::H | GateKind::Cx)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "CX" => GateKind::Cx,
            "DELAY" => GateKind::Delay,
            "MEASURE" => GateKind::Measure,
            other => return Err(Error::UnsupportedGate(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// `[control, target]` for CX.
    pub qubits: Vec<usize>,
    /// Idle length; zero for everything but DELAY.
    pub duration_ns: f64,
    pub at_ns: f64,
}

impl Gate {
    pub fn x(q: usize, at_ns: f64) -> Self {
        Gate::instant(GateKind::X, vec![q], at_ns)
    }

    pub fn h(q: usize, at_ns: f64) -> Self {
        Gate::instant(GateKind::H, vec![q], at_ns)
    }

    pub fn cx(control: usize, target: usize, at_ns: f64) -> Self {
        Gate::instant(GateKind::Cx, vec![control, target], at_ns)
    }

    pub fn delay(q: usize, at_ns: f64, duration_ns: f64) -> Self {
        Gate {
            kind: GateKind::Delay,
            qubits: vec![q],
            duration_ns,
            at_ns,
        }
    }

    pub fn measure(q: usize, at_ns: f64) -> Self {
        Gate::instant(GateKind::Measure, vec![q], at_ns)
    }

    fn instant(kind: GateKind, qubits: Vec<usize>, at_ns: f64) -> Self {
        Gate {
            kind,
            qubits,
            duration_ns: 0.0,
            at_ns,
        }
    }

    pub fn end_ns(&self) -> f64 {
        self.at_ns + self.duration_ns
    }
}

/// Reverses a preparation sequence. X, H and CX are self-inverse, so the
/// inverse is the reversed list; times are left for the caller to assign.
pub fn invert(prep: &[Gate]) -> Result<Vec<Gate>> {
    prep.iter()
        .rev()
        .map(|g| {
            if g.kind.is_unitary() {
                Ok(g.clone())
            } else {
                Err(Error::UnsupportedGate(g.kind.name().to_string()))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
}

/// Which pattern to build. The echo flag is implied by the variant: every
/// superposition or entangled pattern is echoed, the |1> patterns are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternSpec {
    BlankOne,
    BlankPlusEchoed,
    CheckerboardOne { side: Side },
    CheckerboardPlusEchoed { side: Side },
    CheckerboardOneActive { side: Side, n_x_gates: usize },
    Bell { kind: BellKind, layout: PairLayout },
    TripletCollision { with_cnot: bool },
    GhzChain { chain_length: usize },
}

impl PatternSpec {
    pub fn echo(&self) -> bool {
        matches!(
            self,
            PatternSpec::BlankPlusEchoed
                | PatternSpec::CheckerboardPlusEchoed { .. }
                | PatternSpec::Bell { .. }
                | PatternSpec::GhzChain { .. }
        )
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            PatternSpec::BlankOne => "BLANK_ONE",
            PatternSpec::BlankPlusEchoed => "BLANK_PLUS_ECHOED",
            PatternSpec::CheckerboardOne { .. } => "CHECKERBOARD_ONE",
            PatternSpec::CheckerboardPlusEchoed { .. } => "CHECKERBOARD_PLUS_ECHOED",
            PatternSpec::CheckerboardOneActive { .. } => "CHECKERBOARD_ONE_ACTIVE",
            PatternSpec::Bell { .. } => "BELL",
            PatternSpec::TripletCollision { .. } => "TRIPLET_COLLISION",
            PatternSpec::GhzChain { .. } => "GHZ_CHAIN",
        }
    }

    /// True for patterns whose targets sit in |+>-like superpositions.
    pub fn is_superposition(&self) -> bool {
        matches!(
            self,
            PatternSpec::BlankPlusEchoed | PatternSpec::CheckerboardPlusEchoed { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PatternSpec::CheckerboardOneActive { n_x_gates, .. } if n_x_gates % 2 != 0 => Err(
                Error::Pattern(format!("n_x_gates must be even, got {n_x_gates}")),
            ),
            PatternSpec::GhzChain { chain_length } if chain_length < 2 => Err(Error::Pattern(
                format!("chain_length must be at least 2, got {chain_length}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Side| match s {
            Side::A => "A",
            Side::B => "B",
        };
        match self {
            PatternSpec::BlankOne => write!(f, "blank_one"),
            PatternSpec::BlankPlusEchoed => write!(f, "blank_plus"),
            PatternSpec::CheckerboardOne { side: s } => write!(f, "checkerboard_one.{}", side(s)),
            PatternSpec::CheckerboardPlusEchoed { side: s } => {
                write!(f, "checkerboard_plus.{}", side(s))
            }
            PatternSpec::CheckerboardOneActive { side: s, n_x_gates } => {
                write!(f, "active.{}.n{}", side(s), n_x_gates)
            }
            PatternSpec::Bell { kind, layout } => write!(
                f,
                "bell.{}.{}",
                match kind {
                    BellKind::PhiPlus => "phi+",
                    BellKind::PhiMinus => "phi-",
                },
                match layout {
                    PairLayout::Dense => "dense",
                    PairLayout::Spaced => "spaced",
                }
            ),
            PatternSpec::TripletCollision { with_cnot } => {
                write!(f, "triplet.{}", if *with_cnot { "cx" } else { "delay" })
            }
            PatternSpec::GhzChain { chain_length } => write!(f, "ghz.L{chain_length}"),
        }
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Pattern(format!("unknown pattern id `{s}`"));
        let side = |p: &str| match p {
            "A" => Ok(Side::A),
            "B" => Ok(Side::B),
            _ => Err(bad()),
        };
        let parts: Vec<&str> = s.split('.').collect();
        let spec = match parts.as_slice() {
            ["blank_one"] => PatternSpec::BlankOne,
            ["blank_plus"] => PatternSpec::BlankPlusEchoed,
            ["checkerboard_one", s] => PatternSpec::CheckerboardOne { side: side(s)? },
            ["checkerboard_plus", s] => PatternSpec::CheckerboardPlusEchoed { side: side(s)? },
            ["active", s, n] => PatternSpec::CheckerboardOneActive {
                side: side(s)?,
                n_x_gates: n
                    .strip_prefix('n')
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(bad)?,
            },
            ["bell", k, l] => PatternSpec::Bell {
                kind: match *k {
                    "phi+" => BellKind::PhiPlus,
                    "phi-" => BellKind::PhiMinus,
                    _ => return Err(bad()),
                },
                layout: match *l {
                    "dense" => PairLayout::Dense,
                    "spaced" => PairLayout::Spaced,
                    _ => return Err(bad()),
                },
            },
            ["triplet", "cx"] => PatternSpec::TripletCollision { with_cnot: true },
            ["triplet", "delay"] => PatternSpec::TripletCollision { with_cnot: false },
            ["ghz", l] => PatternSpec::GhzChain {
                chain_length: l
                    .strip_prefix('L')
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(bad)?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for PatternSpecId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for PatternSpecId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(PatternSpecId).map_err(serde::de::Error::custom)
    }
}

/// A [`PatternSpec`] that (de)serializes as its compact id string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternSpecId(pub PatternSpec);

/// Partition data a pattern is laid out on.
#[derive(Debug, Clone, Copy)]
pub enum PartitionInput<'a> {
    None,
    Bipartition(&'a Bipartition),
    Triplets(&'a TripletCover),
    Pairs(&'a [(usize, usize)]),
    Chains(&'a [Vec<usize>]),
}

/// Nominal gate durations. Gates execute as instantaneous events; the CX
/// length is what the delay variant of the collision pattern idles for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDurations {
    pub x_ns: f64,
    pub h_ns: f64,
    pub cx_ns: f64,
}

impl Default for GateDurations {
    fn default() -> Self {
        GateDurations {
            x_ns: 35.0,
            h_ns: 35.0,
            cx_ns: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub pattern_id: String,
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub tau_us: f64,
    /// Sets of qubits whose joint all-zeros probability is a fidelity.
    pub target_groups: Vec<Vec<usize>>,
    pub spectators: Vec<usize>,
}

impl Circuit {
    /// End of the schedule, where the measurements sit.
    pub fn duration_ns(&self) -> f64 {
        self.gates.iter().map(Gate::end_ns).fold(0.0, f64::max)
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .flat_map(|g| g.qubits.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Singleton groups for every spectator; their fidelity is always
    /// evaluated per qubit.
    pub fn spectator_groups(&self) -> Vec<Vec<usize>> {
        self.spectators.iter().map(|&q| vec![q]).collect()
    }

    pub fn gates_on(&self, q: usize) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(move |g| g.qubits.contains(&q))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits;
        for (k, g) in self.gates.iter().enumerate() {
            let field = || format!("gates[{k}]");
            if g.qubits.iter().any(|&q| q >= n) {
                return Err(Error::field(field(), "qubit out of range"));
            }
            if !g.at_ns.is_finite() || g.at_ns < 0.0 {
                return Err(Error::field(field(), "invalid time"));
            }
            match g.kind {
                GateKind::Cx => {
                    if g.qubits.len() != 2 || g.qubits[0] == g.qubits[1] {
                        return Err(Error::field(field(), "CX needs two distinct qubits"));
                    }
                }
                GateKind::Delay => {
                    if !(g.duration_ns >= 0.0) || g.qubits.len() != 1 {
                        return Err(Error::field(field(), "DELAY needs one qubit and duration >= 0"));
                    }
                }
                _ => {
                    if g.qubits.len() != 1 {
                        return Err(Error::field(field(), "single-qubit gate expected"));
                    }
                }
            }
        }
        if self.gates.windows(2).any(|w| w[1].at_ns < w[0].at_ns) {
            return Err(Error::field("gates", "not in schedule order"));
        }
        for q in 0..n {
            let mut busy_until = 0.0f64;
            let mut measured = false;
            for g in self.gates_on(q) {
                if measured {
                    return Err(Error::field("gates", format!("gate after MEASURE on qubit {q}")));
                }
                if g.at_ns < busy_until - 1e-9 {
                    return Err(Error::field("gates", format!("overlapping gates on qubit {q}")));
                }
                busy_until = busy_until.max(g.end_ns());
                measured |= g.kind == GateKind::Measure;
            }
        }
        let mut seen = BTreeSet::new();
        for q in self.target_groups.iter().flatten() {
            if !seen.insert(*q) {
                return Err(Error::field("target_groups", format!("qubit {q} in two groups")));
            }
        }
        for q in &self.spectators {
            if seen.contains(q) {
                return Err(Error::field("spectators", format!("qubit {q} is also a target")));
            }
        }
        Ok(())
    }

    /// Line-oriented text form: a `#` header with tau, groups and spectators,
    /// then one `<time_ns> <kind> <qubits...> [duration_ns]` line per gate.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        out.push_str(&format!("# circuit {}\n", self.pattern_id));
        out.push_str(&format!("# num_qubits {}\n", self.num_qubits));
        out.push_str(&format!("# tau_us {}\n", self.tau_us));
        let groups: Vec<String> = self.target_groups.iter().map(|g| join(g)).collect();
        out.push_str(&format!("# groups {}\n", groups.join(";")));
        out.push_str(&format!("# spectators {}\n", join(&self.spectators)));
        for g in &self.gates {
            let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
            out.push_str(&format!("{} {} {}", g.at_ns, g.kind.name(), qs.join(" ")));
            if g.kind == GateKind::Delay {
                out.push_str(&format!(" {}", g.duration_ns));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Circuit {
            pattern_id: String::new(),
            num_qubits: 0,
            gates: Vec::new(),
            tau_us: 0.0,
            target_groups: Vec::new(),
            spectators: Vec::new(),
        };
        let bad = |line: usize, m: &str| Error::MalformedRecord {
            line,
            message: m.to_string(),
        };
        let parse_list = |s: &str, line: usize| -> Result<Vec<usize>> {
            s.split(',')
                .filter(|t| !t.is_empty())
                .map(|t| t.trim().parse().map_err(|_| bad(line, "bad qubit id")))
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(h) = raw.strip_prefix('#') {
                let h = h.trim();
                let (key, val) = h.split_once(' ').unwrap_or((h, ""));
                match key {
                    "circuit" => c.pattern_id = val.to_string(),
                    "num_qubits" => c.num_qubits = val.parse().map_err(|_| bad(line, "num_qubits"))?,
                    "tau_us" => c.tau_us = val.parse().map_err(|_| bad(line, "tau_us"))?,
                    "groups" => {
                        c.target_groups = val
                            .split(';')
                            .filter(|g| !g.is_empty())
                            .map(|g| parse_list(g, line))
                            .collect::<Result<_>>()?
                    }
                    "spectators" => c.spectators = parse_list(val, line)?,
                    _ => {}
                }
                continue;
            }
            let tok: Vec<&str> = raw.split_whitespace().collect();
            if tok.len() < 3 {
                return Err(bad(line, "expected `<time_ns> <kind> <qubits...>`"));
            }
            let at_ns: f64 = tok[0].parse().map_err(|_| bad(line, "bad time"))?;
            let kind: GateKind = tok[1].parse()?;
            let (qtok, duration_ns) = if kind == GateKind::Delay {
                let d = tok[tok.len() - 1].parse().map_err(|_| bad(line, "bad duration"))?;
                (&tok[2..tok.len() - 1], d)
            } else {
                (&tok[2..], 0.0)
            };
            let qubits = qtok
                .iter()
                .map(|t| t.parse().map_err(|_| bad(line, "bad qubit id")))
                .collect::<Result<Vec<usize>>>()?;
            c.gates.push(Gate {
                kind,
                qubits,
                duration_ns,
                at_ns,
            });
        }
        c.validate()?;
        Ok(c)
    }
}

/// Builds the circuit for `spec` at idle time `tau_us`.
pub fn build_pattern(
    spec: &PatternSpec,
    topo: &ChipTopology,
    partition: PartitionInput<'_>,
    tau_us: f64,
    durations: &GateDurations,
) -> Result<Circuit> {
    spec.validate()?;
    if !(tau_us >= 0.0) || !tau_us.is_finite() {
        return Err(Error::Pattern(format!("tau must be finite and >= 0, got {tau_us}")));
    }
    let n = topo.num_qubits();
    let tau_ns = tau_us * 1000.0;
    let mismatch = || {
        Error::Pattern(format!(
            "partition input does not match pattern {}",
            spec.variant_name()
        ))
    };
    let side_targets = |p: &Bipartition, side: Side| -> (Vec<usize>, Vec<usize>) {
        match side {
            Side::A => (p.group_a.clone(), p.group_b.clone()),
            Side::B => (p.group_b.clone(), p.group_a.clone()),
        }
    };

    let mut b = Builder::new(n);
    let (groups, spectators, tau_us) = match *spec {
        PatternSpec::BlankOne => {
            let all: Vec<usize> = (0..n).collect();
            for &q in &all {
                b.pseudo_identity(&[Gate::x(q, 0.0)], &[q], tau_ns, false)?;
            }
            (singletons(&all), vec![], tau_us)
        }
        PatternSpec::BlankPlusEchoed => {
            let all: Vec<usize> = (0..n).collect();
            for &q in &all {
                b.pseudo_identity(&[Gate::h(q, 0.0)], &[q], tau_ns, true)?;
            }
            (singletons(&all), vec![], tau_us)
        }
        PatternSpec::CheckerboardOne { side } | PatternSpec::CheckerboardPlusEchoed { side } => {
            let PartitionInput::Bipartition(p) = partition else {
                return Err(mismatch());
            };
            let (targets, spectators) = side_targets(p, side);
            let plus = matches!(spec, PatternSpec::CheckerboardPlusEchoed { .. });
            for &q in &targets {
                let g = if plus { Gate::h(q, 0.0) } else { Gate::x(q, 0.0) };
                b.pseudo_identity(&[g], &[q], tau_ns, plus)?;
            }
            (singletons(&targets), spectators, tau_us)
        }
        PatternSpec::CheckerboardOneActive { side, n_x_gates } => {
            let PartitionInput::Bipartition(p) = partition else {
                return Err(mismatch());
            };
            let (targets, spectators) = side_targets(p, side);
            for &q in &targets {
                b.pseudo_identity(&[Gate::x(q, 0.0)], &[q], tau_ns, false)?;
            }
            let spacing = tau_ns / n_x_gates.max(1) as f64;
            for &s in &spectators {
                for k in 0..n_x_gates {
                    b.push(Gate::x(s, (k as f64 + 0.5) * spacing));
                }
            }
            (singletons(&targets), spectators, tau_us)
        }
        PatternSpec::Bell { kind, layout } => {
            let PartitionInput::Pairs(pairs) = partition else {
                return Err(mismatch());
            };
            check_pairs(topo, pairs, layout)?;
            for &(first, second) in pairs {
                let mut prep = Vec::new();
                if kind == BellKind::PhiMinus {
                    prep.push(Gate::x(first, 0.0));
                }
                prep.push(Gate::h(first, 0.0));
                prep.push(Gate::cx(first, second, 0.0));
                b.pseudo_identity(&prep, &[first, second], tau_ns, true)?;
            }
            let groups: Vec<Vec<usize>> = pairs.iter().map(|&(a, c)| vec![a, c]).collect();
            let spectators = complement(n, &groups);
            (groups, spectators, tau_us)
        }
        PatternSpec::TripletCollision { with_cnot } => {
            let PartitionInput::Triplets(cover) = partition else {
                return Err(mismatch());
            };
            cover.validate(topo)?;
            let t_end = durations.cx_ns;
            for t in &cover.triplets {
                b.push(Gate::x(t.a, 0.0));
                if with_cnot {
                    b.push(Gate::cx(t.b, t.c, 0.0));
                }
                b.push(Gate::x(t.a, t_end));
            }
            let members: Vec<usize> = cover.triplets.iter().flat_map(|t| t.members()).collect();
            let mut sorted = members.clone();
            sorted.sort_unstable();
            (singletons(&sorted), cover.idle.clone(), t_end / 1000.0)
        }
        PatternSpec::GhzChain { chain_length } => {
            let PartitionInput::Chains(chains) = partition else {
                return Err(mismatch());
            };
            let mut groups = Vec::new();
            for chain in chains {
                if chain.len() != chain_length {
                    return Err(Error::Pattern(format!(
                        "chain {chain:?} has {} qubits, expected {chain_length}",
                        chain.len()
                    )));
                }
                for w in chain.windows(2) {
                    if !topo.has_edge(w[0], w[1]) {
                        return Err(Error::Pattern(format!("chain {chain:?} is not connected")));
                    }
                }
                let mut prep = vec![Gate::h(chain[0], 0.0)];
                prep.extend(chain.windows(2).map(|w| Gate::cx(w[0], w[1], 0.0)));
                b.pseudo_identity(&prep, chain, tau_ns, true)?;
                groups.push(chain.clone());
            }
            let spectators = complement(n, &groups);
            (groups, spectators, tau_us)
        }
    };

    let circuit = Circuit {
        pattern_id: spec.to_string(),
        num_qubits: n,
        gates: b.finish(),
        tau_us,
        target_groups: groups,
        spectators,
    };
    circuit.validate()?;
    Ok(circuit)
}

fn singletons(qs: &[usize]) -> Vec<Vec<usize>> {
    qs.iter().map(|&q| vec![q]).collect()
}

fn complement(n: usize, groups: &[Vec<usize>]) -> Vec<usize> {
    let used: BTreeSet<usize> = groups.iter().flatten().copied().collect();
    (0..n).filter(|q| !used.contains(q)).collect()
}

fn check_pairs(topo: &ChipTopology, pairs: &[(usize, usize)], layout: PairLayout) -> Result<()> {
    let mut owner = vec![None; topo.num_qubits()];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        if !topo.has_edge(a, b) {
            return Err(Error::Pattern(format!("pair ({a}, {b}) is not coupled")));
        }
        for q in [a, b] {
            if owner[q].replace(k).is_some() {
                return Err(Error::Pattern(format!("qubit {q} in two pairs")));
            }
        }
    }
    if layout == PairLayout::Spaced {
        for &(x, y) in topo.edges() {
            if let (Some(i), Some(j)) = (owner[x], owner[y]) {
                if i != j {
                    return Err(Error::Pattern(format!(
                        "spaced layout: pairs {i} and {j} are adjacent via ({x}, {y})"
                    )));
                }
            }
        }
    }
    Ok(())
}

struct Builder {
    n: usize,
    gates: Vec<Gate>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            n,
            gates: Vec::new(),
        }
    }

    fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    /// prep at 0, optional refocusing X on every qubit of `qubits` at tau/2,
    /// inverse at tau.
    fn pseudo_identity(
        &mut self,
        prep: &[Gate],
        qubits: &[usize],
        tau_ns: f64,
        echo: bool,
    ) -> Result<()> {
        for g in prep {
            self.push(Gate { at_ns: 0.0, ..g.clone() });
        }
        if echo {
            for &q in qubits {
                self.push(Gate::x(q, tau_ns / 2.0));
            }
        }
        for g in invert(prep)? {
            self.push(Gate { at_ns: tau_ns, ..g });
        }
        Ok(())
    }

    /// Stable-sorts by time, fills idle gaps with DELAY and appends the
    /// final measurement on every qubit.
    fn finish(self) -> Vec<Gate> {
        let mut gates = self.gates;
        gates.sort_by(|a, b| a.at_ns.total_cmp(&b.at_ns));
        let t_end = gates.iter().map(Gate::end_ns).fold(0.0, f64::max);

        let mut delays = Vec::new();
        for q in 0..self.n {
            let mut cursor = 0.0;
            for g in gates.iter().filter(|g| g.qubits.contains(&q)) {
                if g.at_ns > cursor {
                    delays.push(Gate::delay(q, cursor, g.at_ns - cursor));
                }
                cursor = f64::max(cursor, g.end_ns());
            }
            if t_end > cursor {
                delays.push(Gate::delay(q, cursor, t_end - cursor));
            }
        }
        gates.extend(delays);
        gates.sort_by(|a, b| a.at_ns.total_cmp(&b.at_ns));
        gates.extend((0..self.n).map(|q| Gate::measure(q, t_end)));
        gates
    }
}
