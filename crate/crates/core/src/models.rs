//! Performance maps `Y(X)` from a realized input vector to a scalar output.
//!
//! Input coordinates are laid out flat. The M/M/1 queue with `N` customers
//! uses `[X₁, …, X_N, A₁, …, A_N]` (service times, then interarrival times)
//! and marks the service times as sensitive. The bridge activity network uses
//! one coordinate per arc, all sensitive.

use serde::{Deserialize, Serialize};

use crate::distributions::ParametricDistribution;
use crate::error::{Error, Result};

/// A deterministic map from inputs to a scalar performance measure.
pub trait Model: Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    /// Coordinates whose distribution carries the sensitivity parameter.
    fn sensitive_inputs(&self) -> &[usize];

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Stable description used when fingerprinting a configuration.
    fn describe(&self) -> String {
        format!(
            "{}:dim={}:sensitive={:?}",
            self.name(),
            self.dimension(),
            self.sensitive_inputs()
        )
    }
}

/// A realized input vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVector(Vec<f64>);

impl InputVector {
    /// All entries must be strictly positive and finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidParameter {
                name: "input",
                reason: format!("coordinate {i} is {v}, must be positive and finite"),
            });
        }
        Ok(Self(values))
    }

    /// Queue layout: service times followed by interarrival times.
    pub fn queue(service: &[f64], interarrival: &[f64]) -> Result<Self> {
        if service.len() != interarrival.len() || service.is_empty() {
            return Err(Error::Shape {
                expected: service.len().max(1),
                got: interarrival.len(),
            });
        }
        Self::new(service.iter().chain(interarrival).copied().collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with coordinate `index` replaced by `value`.
    pub fn substitute(&self, index: usize, value: f64) -> Result<Self> {
        if index >= self.0.len() {
            return Err(Error::Index {
                index,
                dimension: self.0.len(),
            });
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter {
                name: "value",
                reason: format!("substituted value must be positive and finite, got {value}"),
            });
        }
        let mut out = self.clone();
        out.0[index] = value;
        Ok(out)
    }
}

/// A directed acyclic activity network with one source and one sink.
///
/// Arc `k` carries duration `x[k]`; the output is the longest source-to-sink
/// path length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityNetwork {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
    /// Arc indices sorted by the topological rank of their tail node.
    schedule: Vec<usize>,
}

impl ActivityNetwork {
    pub fn new(nodes: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Model("network has no arcs".into()));
        }
        let mut indegree = vec![0usize; nodes];
        let mut outdegree = vec![0usize; nodes];
        for &(from, to) in &arcs {
            if from >= nodes || to >= nodes {
                return Err(Error::Model(format!(
                    "arc ({from}, {to}) references a node outside 0..{nodes}"
                )));
            }
            if from == to {
                return Err(Error::Model(format!("self-loop at node {from}")));
            }
            outdegree[from] += 1;
            indegree[to] += 1;
        }
        let sources: Vec<_> = (0..nodes).filter(|&v| indegree[v] == 0).collect();
        let sinks: Vec<_> = (0..nodes).filter(|&v| outdegree[v] == 0).collect();
        if sources.len() != 1 || sinks.len() != 1 {
            return Err(Error::Model(format!(
                "need exactly one source and one sink, found sources {sources:?} and sinks {sinks:?}"
            )));
        }

        // Kahn's algorithm.
        let mut rank = vec![usize::MAX; nodes];
        let mut remaining = indegree.clone();
        let mut ready = sources.clone();
        let mut next = 0;
        while let Some(v) = ready.pop() {
            rank[v] = next;
            next += 1;
            for &(from, to) in &arcs {
                if from == v {
                    remaining[to] -= 1;
                    if remaining[to] == 0 {
                        ready.push(to);
                    }
                }
            }
        }
        if next != nodes {
            return Err(Error::Model("network contains a cycle".into()));
        }
        let mut schedule: Vec<usize> = (0..arcs.len()).collect();
        schedule.sort_by_key(|&k| rank[arcs[k].0]);

        Ok(Self {
            nodes,
            arcs,
            source: sources[0],
            sink: sinks[0],
            schedule,
        })
    }

    /// Five-arc bridge: `a₁: s→1, a₂: s→2, a₃: 1→2, a₄: 1→t, a₅: 2→t`, with
    /// paths `a₁a₄`, `a₁a₃a₅` and `a₂a₅`.
    pub fn bridge() -> Self {
        Self::new(4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
            .expect("bridge network is a valid DAG")
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn longest_path(&self, durations: &[f64]) -> f64 {
        let mut finish = vec![f64::NEG_INFINITY; self.nodes];
        finish[self.source] = 0.0;
        for &k in &self.schedule {
            let (from, to) = self.arcs[k];
            let t = finish[from] + durations[k];
            if t > finish[to] {
                finish[to] = t;
            }
        }
        finish[self.sink]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// FCFS single-server queue; output is the system time of the last of
    /// `customers` customers.
    Mm1 { customers: usize },
    San(ActivityNetwork),
}

/// A built-in model together with its sensitive coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    kind: ModelKind,
    sensitive: Vec<usize>,
}

impl ModelSpec {
    pub fn mm1(customers: usize) -> Result<Self> {
        if customers == 0 {
            return Err(Error::InvalidParameter {
                name: "n_customers",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            kind: ModelKind::Mm1 { customers },
            sensitive: (0..customers).collect(),
        })
    }

    pub fn san(network: ActivityNetwork) -> Self {
        let sensitive = (0..network.arcs.len()).collect();
        Self {
            kind: ModelKind::San(network),
            sensitive,
        }
    }

    pub fn san_bridge() -> Self {
        Self::san(ActivityNetwork::bridge())
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Distributions laid out for this model: `sensitive` on every sensitive
    /// coordinate and `other` elsewhere.
    pub fn input_distributions(
        &self,
        sensitive: ParametricDistribution,
        other: ParametricDistribution,
    ) -> InputDistributions {
        let mut v = vec![other; self.dimension()];
        for &i in &self.sensitive {
            v[i] = sensitive;
        }
        InputDistributions(v)
    }

    /// Checks that `inputs` matches this model's layout and only produces
    /// admissible (strictly positive) inputs.
    pub fn check_inputs(&self, inputs: &InputDistributions) -> Result<()> {
        if inputs.len() != self.dimension() {
            return Err(Error::Shape {
                expected: self.dimension(),
                got: inputs.len(),
            });
        }
        if let Some((i, d)) = inputs
            .iter()
            .enumerate()
            .find(|(_, d)| !d.has_positive_support())
        {
            return Err(Error::Model(format!(
                "{} requires positive inputs, but coordinate {i} uses the {} family",
                self.name(),
                d.name()
            )));
        }
        Ok(())
    }

    pub fn evaluate_vector(&self, x: &InputVector) -> Result<f64> {
        self.evaluate(x.as_slice())
    }
}

/// Lindley recursion for FCFS system times: `T₁ = X₁`,
/// `Tₙ = Xₙ + max(0, Tₙ₋₁ − Aₙ)`. `A₁` is unused.
pub fn lindley_system_time(service: &[f64], interarrival: &[f64]) -> f64 {
    let mut t = service[0];
    for (x, a) in service[1..].iter().zip(&interarrival[1..]) {
        t = x + (t - a).max(0.0);
    }
    t
}

impl Model for ModelSpec {
    fn name(&self) -> &str {
        match self.kind {
            ModelKind::Mm1 { .. } => "mm1",
            ModelKind::San(_) => "san",
        }
    }

    fn dimension(&self) -> usize {
        match &self.kind {
            ModelKind::Mm1 { customers } => 2 * customers,
            ModelKind::San(net) => net.arcs.len(),
        }
    }

    fn sensitive_inputs(&self) -> &[usize] {
        &self.sensitive
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let expected = self.dimension();
        if x.len() != expected {
            return Err(Error::Shape {
                expected,
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            ModelKind::Mm1 { customers } => {
                let (service, interarrival) = x.split_at(*customers);
                lindley_system_time(service, interarrival)
            }
            ModelKind::San(net) => net.longest_path(x),
        })
    }

    fn describe(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }
}

/// Per-coordinate input distributions, aligned with a model's layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistributions(Vec<ParametricDistribution>);

impl InputDistributions {
    pub fn new(dists: Vec<ParametricDistribution>) -> Self {
        Self(dists)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&ParametricDistribution> {
        self.0.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ParametricDistribution> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[ParametricDistribution] {
        &self.0
    }

    /// Copy with the sensitivity parameter of each listed coordinate set to
    /// `theta`.
    pub fn with_theta(&self, coords: &[usize], theta: f64) -> Result<Self> {
        let mut out = self.0.clone();
        for &i in coords {
            let d = out.get(i).ok_or(Error::Index {
                index: i,
                dimension: self.0.len(),
            })?;
            out[i] = d.with_theta(theta)?;
        }
        Ok(Self(out))
    }
}
