//! Optical networks: components wired into a DAG and evaluated in
//! topological order.
//!
//! Every input port has exactly one incoming edge and every output port
//! feeds at most one input. Unused outputs are discarded.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{make_source, Amplitude, OpticalField};
use crate::optics::{self, ModeFilter};
use crate::sequence::{self, PhaseSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Source,
    PhaseMod,
    Coupler2,
    Pbs,
    Rotator,
    ModeFilter,
    Splitter,
    Combiner,
    Sink,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 9] = [
        ComponentKind::Source,
        ComponentKind::PhaseMod,
        ComponentKind::Coupler2,
        ComponentKind::Pbs,
        ComponentKind::Rotator,
        ComponentKind::ModeFilter,
        ComponentKind::Splitter,
        ComponentKind::Combiner,
        ComponentKind::Sink,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Source => "source",
            ComponentKind::PhaseMod => "phase_mod",
            ComponentKind::Coupler2 => "coupler2",
            ComponentKind::Pbs => "pbs",
            ComponentKind::Rotator => "rotator",
            ComponentKind::ModeFilter => "mode_filter",
            ComponentKind::Splitter => "splitter",
            ComponentKind::Combiner => "combiner",
            ComponentKind::Sink => "sink",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ComponentKind> {
        Self::ALL.iter().copied().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A component kind together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Source { amp_up: Amplitude, amp_right: Amplitude },
    PhaseMod { sequence: u8 },
    Coupler2,
    Pbs,
    Rotator { angle_deg: f64 },
    ModeFilter(ModeFilter),
    Splitter { n: usize },
    /// N-input combine; N is the number of wired inputs.
    Combiner,
    Sink,
}

/// Number of inputs a component accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "{}", k),
            Arity::AtLeast(k) => write!(f, "at least {}", k),
        }
    }
}

impl Element {
    pub fn kind(&self) -> ComponentKind {
        match self {
            Element::Source { .. } => ComponentKind::Source,
            Element::PhaseMod { .. } => ComponentKind::PhaseMod,
            Element::Coupler2 => ComponentKind::Coupler2,
            Element::Pbs => ComponentKind::Pbs,
            Element::Rotator { .. } => ComponentKind::Rotator,
            Element::ModeFilter(_) => ComponentKind::ModeFilter,
            Element::Splitter { .. } => ComponentKind::Splitter,
            Element::Combiner => ComponentKind::Combiner,
            Element::Sink => ComponentKind::Sink,
        }
    }

    pub fn input_arity(&self) -> Arity {
        match self {
            Element::Source { .. } => Arity::Exactly(0),
            Element::Coupler2 | Element::Pbs => Arity::Exactly(2),
            Element::Combiner => Arity::AtLeast(2),
            _ => Arity::Exactly(1),
        }
    }

    pub fn output_count(&self) -> usize {
        match self {
            Element::Sink => 0,
            Element::Coupler2 | Element::Pbs => 2,
            Element::Splitter { n } => *n,
            _ => 1,
        }
    }
}

/// Reference to output `port` of `component`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub component: String,
    pub port: usize,
}

impl PortRef {
    pub fn new(component: impl Into<String>, port: usize) -> Self {
        PortRef {
            component: component.into(),
            port,
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.port == 0 {
            f.write_str(&self.component)
        } else {
            write!(f, "{}.out_{}", self.component, self.port)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub element: Element,
    pub inputs: Vec<PortRef>,
}

impl Component {
    pub fn new(id: impl Into<String>, element: Element, inputs: Vec<PortRef>) -> Self {
        Component {
            id: id.into(),
            element,
            inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    DuplicateId { component: String },
    InvalidParameter { component: String, name: &'static str, reason: String },
    Arity { component: String, kind: ComponentKind, expected: Arity, found: usize },
    UnknownComponent { component: String, input: usize, target: String },
    PortOutOfRange { component: String, input: usize, target: PortRef, available: usize },
    PortReused { component: String, input: usize, target: PortRef },
    Cycle { component: String },
    NotTopological,
}

impl NetworkError {
    /// The component the error is attributed to.
    pub fn component(&self) -> Option<&str> {
        match self {
            NetworkError::DuplicateId { component }
            | NetworkError::InvalidParameter { component, .. }
            | NetworkError::Arity { component, .. }
            | NetworkError::UnknownComponent { component, .. }
            | NetworkError::PortOutOfRange { component, .. }
            | NetworkError::PortReused { component, .. }
            | NetworkError::Cycle { component } => Some(component),
            NetworkError::NotTopological => None,
        }
    }

    /// Index of the offending input reference, when there is one.
    pub fn input(&self) -> Option<usize> {
        match self {
            NetworkError::UnknownComponent { input, .. }
            | NetworkError::PortOutOfRange { input, .. }
            | NetworkError::PortReused { input, .. } => Some(*input),
            _ => None,
        }
    }
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::DuplicateId { component } => {
                write!(f, "duplicate component id `{}`", component)
            }
            NetworkError::InvalidParameter { component, name, reason } => {
                write!(f, "invalid parameter `{}` on `{}`: {}", name, component, reason)
            }
            NetworkError::Arity { component, kind, expected, found } => write!(
                f,
                "arity violation: {} `{}` takes {} input(s), found {}",
                kind, component, expected, found
            ),
            NetworkError::UnknownComponent { component, target, .. } => write!(
                f,
                "dangling port: `{}` references undeclared component `{}`",
                component, target
            ),
            NetworkError::PortOutOfRange { component, target, available, .. } => write!(
                f,
                "dangling port: `{}` references `{}` but `{}` has {} output(s)",
                component, target, target.component, available
            ),
            NetworkError::PortReused { component, target, .. } => write!(
                f,
                "output `{}` already feeds another input (used again by `{}`)",
                target, component
            ),
            NetworkError::Cycle { component } => {
                write!(f, "cycle detected through component `{}`", component)
            }
            NetworkError::NotTopological => write!(f, "evaluation order is not topological"),
        }
    }
}

impl core::error::Error for NetworkError {}

/// A validated, acyclic component graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    components: Vec<Component>,
    /// `producers[i][j]` = index of the component feeding input `j` of `i`.
    producers: Vec<Vec<usize>>,
}

impl Network {
    /// Validates and builds a network. Errors are reported for the first
    /// offending component in declaration order.
    pub fn new(components: Vec<Component>) -> core::result::Result<Network, NetworkError> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, c) in components.iter().enumerate() {
            if index.insert(c.id.as_str(), i).is_some() {
                return Err(NetworkError::DuplicateId {
                    component: c.id.clone(),
                });
            }
            check_parameters(c)?;
            let arity = c.element.input_arity();
            if !arity.accepts(c.inputs.len()) {
                return Err(NetworkError::Arity {
                    component: c.id.clone(),
                    kind: c.element.kind(),
                    expected: arity,
                    found: c.inputs.len(),
                });
            }
        }

        let mut used: BTreeMap<&PortRef, ()> = BTreeMap::new();
        let mut producers = Vec::with_capacity(components.len());
        for c in &components {
            let mut row = Vec::with_capacity(c.inputs.len());
            for (j, r) in c.inputs.iter().enumerate() {
                let Some(&p) = index.get(r.component.as_str()) else {
                    return Err(NetworkError::UnknownComponent {
                        component: c.id.clone(),
                        input: j,
                        target: r.component.clone(),
                    });
                };
                let available = components[p].element.output_count();
                if r.port >= available {
                    return Err(NetworkError::PortOutOfRange {
                        component: c.id.clone(),
                        input: j,
                        target: r.clone(),
                        available,
                    });
                }
                if used.insert(r, ()).is_some() {
                    return Err(NetworkError::PortReused {
                        component: c.id.clone(),
                        input: j,
                        target: r.clone(),
                    });
                }
                row.push(p);
            }
            producers.push(row);
        }

        let net = Network {
            components,
            producers,
        };
        net.topological_order(false)?;
        Ok(net)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Sink ids in declaration order.
    pub fn sinks(&self) -> impl Iterator<Item = &str> {
        self.components
            .iter()
            .filter(|c| c.element == Element::Sink)
            .map(|c| c.id.as_str())
    }

    /// Kahn's algorithm. Among ready components, picks the earliest declared
    /// one, or the latest when `latest_first` is set.
    pub fn topological_order(&self, latest_first: bool) -> core::result::Result<Vec<usize>, NetworkError> {
        let n = self.components.len();
        let mut pending: Vec<usize> = self.producers.iter().map(Vec::len).collect();
        let mut consumers: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for (i, row) in self.producers.iter().enumerate() {
            for &p in row {
                consumers[p].push(i);
            }
        }
        let mut ready: alloc::collections::BTreeSet<usize> =
            (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = if latest_first { ready.pop_last() } else { ready.pop_first() } {
            order.push(i);
            for &c in &consumers[i] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|i| !order.contains(i)).unwrap_or(0);
            return Err(NetworkError::Cycle {
                component: self.components[stuck].id.clone(),
            });
        }
        Ok(order)
    }

    /// Evaluates the network and returns one field per sink, in sink
    /// declaration order, labeled with the sink id. Sources produce fields as
    /// long as the family's sequences.
    pub fn evaluate(&self, family: &[PhaseSequence]) -> Result<Vec<OpticalField>> {
        let order = self.topological_order(false)?;
        self.evaluate_in_order(family, &order)
    }

    /// Evaluates in a caller-supplied order, which must be topological.
    pub fn evaluate_in_order(&self, family: &[PhaseSequence], order: &[usize]) -> Result<Vec<OpticalField>> {
        let n = self.components.len();
        if order.len() != n {
            return Err(NetworkError::NotTopological.into());
        }
        let len = family
            .first()
            .map(PhaseSequence::len)
            .ok_or(Error::EmptyInput("sequence family"))?;

        let mut outputs: Vec<Option<Vec<Option<OpticalField>>>> = alloc::vec![None; n];
        let mut sink_fields: Vec<Option<OpticalField>> = alloc::vec![None; n];
        for &i in order {
            let c = self.components.get(i).ok_or(NetworkError::NotTopological)?;
            let mut inputs = Vec::with_capacity(c.inputs.len());
            for (r, &p) in c.inputs.iter().zip(&self.producers[i]) {
                let f = outputs[p]
                    .as_mut()
                    .and_then(|o| o[r.port].take())
                    .ok_or(NetworkError::NotTopological)?;
                inputs.push(f);
            }
            let produced: Vec<OpticalField> = match &c.element {
                Element::Source { amp_up, amp_right } => {
                    alloc::vec![make_source(*amp_up, *amp_right, len, c.id.as_str())?]
                }
                Element::PhaseMod { sequence: id } => {
                    let s = sequence::resolve(family, *id)?;
                    alloc::vec![crate::field::modulate(&inputs[0], &s)?]
                }
                Element::Coupler2 => {
                    let (a, b) = optics::coupler2(&inputs[0], &inputs[1])?;
                    alloc::vec![a, b]
                }
                Element::Pbs => {
                    let (a, b) = optics::pbs(&inputs[0], &inputs[1])?;
                    alloc::vec![a, b]
                }
                Element::Rotator { angle_deg } => alloc::vec![optics::rotator(&inputs[0], *angle_deg)],
                Element::ModeFilter(pass) => alloc::vec![optics::mode_filter(&inputs[0], *pass)],
                Element::Splitter { n } => optics::splitter(&inputs[0], *n)?,
                Element::Combiner => {
                    let refs: Vec<&OpticalField> = inputs.iter().collect();
                    alloc::vec![optics::combine(&refs)?]
                }
                Element::Sink => {
                    let f = inputs.pop().ok_or(NetworkError::NotTopological)?;
                    sink_fields[i] = Some(f.with_label(c.id.as_str()));
                    Vec::new()
                }
            };
            outputs[i] = Some(produced.into_iter().map(Some).collect());
        }

        Ok(self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.element == Element::Sink)
            .filter_map(|(i, _)| sink_fields[i].take())
            .collect())
    }
}

fn check_parameters(c: &Component) -> core::result::Result<(), NetworkError> {
    let bad = |name: &'static str, reason: &str| NetworkError::InvalidParameter {
        component: c.id.clone(),
        name,
        reason: reason.into(),
    };
    match &c.element {
        Element::Rotator { angle_deg } if !angle_deg.is_finite() => Err(bad("angle", "must be finite")),
        Element::Splitter { n } if *n < 2 => Err(bad("n", "splitter needs at least 2 outputs")),
        _ => Ok(()),
    }
}
