//! Timed circuit IR plus the builders for syndrome-extraction rounds and full
//! memory experiments.
//!
//! A program is a flat instruction list where `TICK` closes a layer. Within a
//! layer no qubit is touched by two gates; the one exception is the
//! measure-and-reset step, where `MEASURE q` is followed by `RESET q`.

use crate::error::{Error, Result};
use crate::layout::{Basis, CodeLayout, LogicalState, Side};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Instruction {
    H(usize),
    /// control, target
    Cnot(usize, usize),
    Cz(usize, usize),
    X(usize),
    Z(usize),
    I(usize),
    Reset(usize),
    Measure(usize),
    Depol1(f64, usize),
    Depol2(f64, usize, usize),
    XErr(f64, usize),
    Tick,
}

/// Instruction kind without operands, used for censuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    H,
    Cnot,
    Cz,
    X,
    Z,
    I,
    Reset,
    Measure,
    Depol1,
    Depol2,
    XErr,
    Tick,
}

impl Instruction {
    pub fn kind(&self) -> Kind {
        match self {
            Instruction::H(_) => Kind::H,
            Instruction::Cnot(..) => Kind::Cnot,
            Instruction::Cz(..) => Kind::Cz,
            Instruction::X(_) => Kind::X,
            Instruction::Z(_) => Kind::Z,
            Instruction::I(_) => Kind::I,
            Instruction::Reset(_) => Kind::Reset,
            Instruction::Measure(_) => Kind::Measure,
            Instruction::Depol1(..) => Kind::Depol1,
            Instruction::Depol2(..) => Kind::Depol2,
            Instruction::XErr(..) => Kind::XErr,
            Instruction::Tick => Kind::Tick,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Instruction::H(q)
            | Instruction::X(q)
            | Instruction::Z(q)
            | Instruction::I(q)
            | Instruction::Reset(q)
            | Instruction::Measure(q)
            | Instruction::Depol1(_, q)
            | Instruction::XErr(_, q) => vec![q],
            Instruction::Cnot(a, b) | Instruction::Cz(a, b) | Instruction::Depol2(_, a, b) => {
                vec![a, b]
            }
            Instruction::Tick => vec![],
        }
    }

    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            Instruction::Depol1(..) | Instruction::Depol2(..) | Instruction::XErr(..)
        )
    }

    pub fn is_unitary(&self) -> bool {
        matches!(
            self,
            Instruction::H(_)
                | Instruction::Cnot(..)
                | Instruction::Cz(..)
                | Instruction::X(_)
                | Instruction::Z(_)
                | Instruction::I(_)
        )
    }

    pub fn probability(&self) -> Option<f64> {
        match *self {
            Instruction::Depol1(p, _) | Instruction::Depol2(p, _, _) | Instruction::XErr(p, _) => {
                Some(p)
            }
            _ => None,
        }
    }

    fn validate(&self, qubit_count: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= qubit_count) {
            return Err(Error::Contract(format!(
                "{self:?} addresses qubit {q} outside 0..{qubit_count}"
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Contract(format!(
                "{self:?} needs two distinct targets"
            )));
        }
        if let Some(p) = self.probability() {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::Contract(format!(
                    "{self:?} has probability outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn to_line(self) -> String {
        match self {
            Instruction::H(q) => format!("H {q}"),
            Instruction::Cnot(c, t) => format!("CNOT {c} {t}"),
            Instruction::Cz(a, b) => format!("CZ {a} {b}"),
            Instruction::X(q) => format!("X {q}"),
            Instruction::Z(q) => format!("Z {q}"),
            Instruction::I(q) => format!("I {q}"),
            Instruction::Reset(q) => format!("RESET {q}"),
            Instruction::Measure(q) => format!("MEASURE {q}"),
            Instruction::Depol1(p, q) => format!("DEPOL1({p}) {q}"),
            Instruction::Depol2(p, a, b) => format!("DEPOL2({p}) {a} {b}"),
            Instruction::XErr(p, q) => format!("XERR({p}) {q}"),
            Instruction::Tick => "TICK".to_string(),
        }
    }

    fn parse_line(line: &str, lineno: usize) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let head = parts
            .next()
            .ok_or_else(|| Error::format(lineno, "empty instruction"))?;
        let args: Vec<usize> = parts
            .map(|a| {
                a.parse::<usize>()
                    .map_err(|_| Error::format(lineno, format!("bad qubit index `{a}`")))
            })
            .collect::<Result<_>>()?;
        let (name, prob) = match head.find('(') {
            Some(open) => {
                let close = head
                    .strip_suffix(')')
                    .ok_or_else(|| Error::format(lineno, format!("unclosed `(` in `{head}`")))?;
                let p = close[open + 1..]
                    .parse::<f64>()
                    .map_err(|_| Error::format(lineno, format!("bad probability in `{head}`")))?;
                (&head[..open], Some(p))
            }
            None => (head, None),
        };
        let want = |n: usize| -> Result<()> {
            if args.len() != n {
                return Err(Error::format(
                    lineno,
                    format!("`{name}` takes {n} qubit(s), got {}", args.len()),
                ));
            }
            Ok(())
        };
        let need_p = || prob.ok_or_else(|| Error::format(lineno, format!("`{name}` needs (p)")));
        let no_p = || -> Result<()> {
            if prob.is_some() {
                return Err(Error::format(lineno, format!("`{name}` takes no probability")));
            }
            Ok(())
        };
        let ins = match name {
            "H" | "X" | "Z" | "I" | "RESET" | "MEASURE" => {
                no_p()?;
                want(1)?;
                let q = args[0];
                match name {
                    "H" => Instruction::H(q),
                    "X" => Instruction::X(q),
                    "Z" => Instruction::Z(q),
                    "I" => Instruction::I(q),
                    "RESET" => Instruction::Reset(q),
                    _ => Instruction::Measure(q),
                }
            }
            "CNOT" | "CZ" => {
                no_p()?;
                want(2)?;
                if name == "CNOT" {
                    Instruction::Cnot(args[0], args[1])
                } else {
                    Instruction::Cz(args[0], args[1])
                }
            }
            "DEPOL1" => {
                want(1)?;
                Instruction::Depol1(need_p()?, args[0])
            }
            "XERR" => {
                want(1)?;
                Instruction::XErr(need_p()?, args[0])
            }
            "DEPOL2" => {
                want(2)?;
                Instruction::Depol2(need_p()?, args[0], args[1])
            }
            "TICK" => {
                no_p()?;
                want(0)?;
                Instruction::Tick
            }
            other => return Err(Error::format(lineno, format!("unknown instruction `{other}`"))),
        };
        Ok(ins)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitProgram {
    qubit_count: usize,
    instructions: Vec<Instruction>,
    /// qubit of each measurement, in record order
    measured: Vec<usize>,
    /// per qubit, the measurement index of each occurrence
    by_qubit: Vec<Vec<usize>>,
}

impl CircuitProgram {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            instructions: Vec::new(),
            measured: Vec::new(),
            by_qubit: vec![Vec::new(); qubit_count],
        }
    }

    /// Validates every instruction and the layer schedule.
    pub fn from_instructions(qubit_count: usize, instructions: Vec<Instruction>) -> Result<Self> {
        let mut prog = Self::new(qubit_count);
        for ins in instructions {
            prog.push_raw(ins)?;
        }
        prog.validate_schedule()?;
        Ok(prog)
    }

    fn push_raw(&mut self, ins: Instruction) -> Result<()> {
        ins.validate(self.qubit_count)?;
        if let Instruction::Measure(q) = ins {
            self.by_qubit[q].push(self.measured.len());
            self.measured.push(q);
        }
        self.instructions.push(ins);
        Ok(())
    }

    /// Appends the given instructions as one layer, closed by a `TICK`.
    pub fn push_layer(&mut self, layer: impl IntoIterator<Item = Instruction>) -> Result<()> {
        let start = self.instructions.len();
        for ins in layer {
            if ins == Instruction::Tick {
                return Err(Error::Contract("TICK inside a layer".into()));
            }
            self.push_raw(ins)?;
        }
        check_layer(&self.instructions[start..], self.qubit_count)?;
        self.instructions.push(Instruction::Tick);
        Ok(())
    }

    pub fn append(&mut self, other: &CircuitProgram) -> Result<()> {
        if other.qubit_count != self.qubit_count {
            return Err(Error::Contract(format!(
                "appending a {}-qubit program to a {}-qubit one",
                other.qubit_count, self.qubit_count
            )));
        }
        for &ins in &other.instructions {
            self.push_raw(ins)?;
        }
        Ok(())
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn num_measurements(&self) -> usize {
        self.measured.len()
    }

    /// Qubit measured at each record position.
    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured
    }

    /// Record position of the `occurrence`-th measurement of `qubit`.
    pub fn measurement_index(&self, qubit: usize, occurrence: usize) -> Option<usize> {
        self.by_qubit.get(qubit)?.get(occurrence).copied()
    }

    /// Instruction ranges of the TICK-delimited layers (TICKs excluded).
    /// Trailing instructions without a closing TICK form a final layer.
    pub fn layers(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, ins) in self.instructions.iter().enumerate() {
            if *ins == Instruction::Tick {
                out.push(start..i);
                start = i + 1;
            }
        }
        if start < self.instructions.len() {
            out.push(start..self.instructions.len());
        }
        out
    }

    pub fn validate_schedule(&self) -> Result<()> {
        for r in self.layers() {
            check_layer(&self.instructions[r], self.qubit_count)?;
        }
        Ok(())
    }

    /// Program with every noise instruction removed.
    pub fn strip_noise(&self) -> CircuitProgram {
        let mut out = Self::new(self.qubit_count);
        for ins in self.instructions.iter().filter(|i| !i.is_noise()) {
            out.push_raw(*ins).expect("instruction already validated");
        }
        out
    }

    pub fn census(&self) -> BTreeMap<Kind, usize> {
        let mut m = BTreeMap::new();
        for ins in &self.instructions {
            *m.entry(ins.kind()).or_insert(0) += 1;
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# qubits={}", self.qubit_count).unwrap();
        for ins in &self.instructions {
            s.push_str(&ins.to_line());
            s.push('\n');
        }
        s
    }

    /// Parses the text format. A `# qubits=N` header fixes the qubit count;
    /// otherwise it is inferred from the largest index. Other `#` lines are comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut instructions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(n) = comment.trim().strip_prefix("qubits=") {
                    let n = n
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::format(i + 1, "bad qubit count"))?;
                    declared = Some(n);
                }
                continue;
            }
            instructions.push(Instruction::parse_line(line, i + 1)?);
        }
        let inferred = instructions
            .iter()
            .flat_map(|i| i.qubits())
            .max()
            .map_or(0, |q| q + 1);
        let n = declared.unwrap_or(inferred);
        Self::from_instructions(n, instructions)
    }
}

fn check_layer(layer: &[Instruction], qubit_count: usize) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Use {
        Free,
        Gate,
        Measured,
        Reset,
    }
    let mut used = vec![Use::Free; qubit_count];
    for ins in layer {
        match *ins {
            Instruction::Measure(q) => {
                if used[q] != Use::Free {
                    return Err(Error::Contract(format!(
                        "qubit {q} measured after other use in the same layer"
                    )));
                }
                used[q] = Use::Measured;
            }
            Instruction::Reset(q) => {
                if !matches!(used[q], Use::Free | Use::Measured) {
                    return Err(Error::Contract(format!(
                        "qubit {q} reset after other use in the same layer"
                    )));
                }
                used[q] = Use::Reset;
            }
            ins if ins.is_unitary() => {
                for q in ins.qubits() {
                    if used[q] != Use::Free {
                        return Err(Error::Contract(format!(
                            "qubit {q} used twice in one layer ({ins:?})"
                        )));
                    }
                    used[q] = Use::Gate;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Layers of one syndrome-extraction round, excluding the closing measure-reset step.
fn round_gate_layers(layout: &CodeLayout) -> Vec<Vec<Instruction>> {
    let n_synd = layout.n_synd();
    let synd = |s| layout.syndrome_qubit(s);
    let data = |i| layout.data_qubit(i);
    let per_synd = |f: &dyn Fn(usize) -> Vec<Instruction>| -> Vec<Instruction> {
        (0..n_synd).flat_map(f).collect()
    };
    // data-flag coupling: CZ detects X errors (Z basis), CNOT flag->data detects Z errors
    let couple = |flag: usize, d: usize| match layout.basis() {
        Basis::Z => Instruction::Cz(flag, d),
        Basis::X => Instruction::Cnot(flag, d),
    };
    match (layout.flags(), layout.basis()) {
        (0, Basis::Z) => vec![
            per_synd(&|s| vec![Instruction::Cnot(data(s), synd(s))]),
            per_synd(&|s| vec![Instruction::Cnot(data(s + 1), synd(s))]),
        ],
        (0, Basis::X) => vec![
            per_synd(&|s| vec![Instruction::H(synd(s))]),
            per_synd(&|s| vec![Instruction::Cnot(synd(s), data(s))]),
            per_synd(&|s| vec![Instruction::Cnot(synd(s), data(s + 1))]),
            per_synd(&|s| vec![Instruction::H(synd(s))]),
        ],
        (1, _) => {
            let fl = |s| layout.flag_qubit(s, Side::Left, 1);
            let fr = |s| layout.flag_qubit(s, Side::Right, 1);
            vec![
                per_synd(&|s| vec![Instruction::H(synd(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), fl(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), fr(s)), couple(fl(s), data(s))]),
                per_synd(&|s| vec![couple(fr(s), data(s + 1)), Instruction::Cnot(synd(s), fl(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), fr(s))]),
                per_synd(&|s| vec![Instruction::H(synd(s))]),
            ]
        }
        (2, _) => {
            let il = |s| layout.flag_qubit(s, Side::Left, 1);
            let ol = |s| layout.flag_qubit(s, Side::Left, 2);
            let ir = |s| layout.flag_qubit(s, Side::Right, 1);
            let or = |s| layout.flag_qubit(s, Side::Right, 2);
            vec![
                per_synd(&|s| vec![Instruction::H(synd(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), il(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), ir(s)), Instruction::Cnot(il(s), ol(s))]),
                per_synd(&|s| vec![Instruction::Cnot(ir(s), or(s)), couple(ol(s), data(s))]),
                per_synd(&|s| vec![couple(or(s), data(s + 1)), Instruction::Cnot(il(s), ol(s))]),
                per_synd(&|s| vec![Instruction::Cnot(ir(s), or(s)), Instruction::Cnot(synd(s), il(s))]),
                per_synd(&|s| vec![Instruction::Cnot(synd(s), ir(s))]),
                per_synd(&|s| vec![Instruction::H(synd(s))]),
            ]
        }
        _ => unreachable!("layout validated flag count"),
    }
}

/// One syndrome-extraction round as a standalone fragment on the layout's qubits.
pub fn build_extraction_round(layout: &CodeLayout) -> CircuitProgram {
    let mut prog = CircuitProgram::new(layout.total_qubits());
    for layer in round_gate_layers(layout) {
        prog.push_layer(layer).expect("round layers are disjoint");
    }
    let ancillas: Vec<usize> = layout.ancilla_qubits().collect();
    let step = ancillas
        .iter()
        .map(|&q| Instruction::Measure(q))
        .chain(ancillas.iter().map(|&q| Instruction::Reset(q)));
    prog.push_layer(step).expect("measure-reset layer is valid");
    prog
}

pub fn build_memory_experiment(
    layout: &CodeLayout,
    rounds: usize,
    state: LogicalState,
) -> Result<CircuitProgram> {
    if rounds == 0 {
        return Err(Error::Parameter("at least one round is required".into()));
    }
    if state.basis() != layout.basis() {
        return Err(Error::Parameter(format!(
            "state {state} does not belong to the {} basis of the layout",
            layout.basis()
        )));
    }
    let n = layout.total_qubits();
    let data: Vec<usize> = layout.data_qubits().collect();
    let mut prog = CircuitProgram::new(n);
    prog.push_layer((0..n).map(Instruction::Reset))?;
    if state.codeword_bit() {
        prog.push_layer(data.iter().map(|&q| Instruction::X(q)))?;
    }
    if layout.basis() == Basis::X {
        prog.push_layer(data.iter().map(|&q| Instruction::H(q)))?;
    }
    let round = build_extraction_round(layout);
    for _ in 0..rounds {
        prog.append(&round)?;
    }
    if layout.basis() == Basis::X {
        prog.push_layer(data.iter().map(|&q| Instruction::H(q)))?;
    }
    prog.push_layer(data.iter().map(|&q| Instruction::Measure(q)))?;
    Ok(prog)
}
