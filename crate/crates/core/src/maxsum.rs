//! Generic max-sum solver over factor graphs with the binary action domain
//! {Stop, Move}, plus an exhaustive enumeration oracle.
//!
//! One factor per agent: `U_z(scope) = beta_z(own action) - penalty`, where
//! the penalty charges 1 for every scope neighbor that picks Move while the
//! factor's own variable also picks Move. Messages are exchanged on a
//! synchronous (flooding) schedule and recentered to sum to zero per edge,
//! which bounds magnitudes on cyclic topologies. Max-sum is exact on trees
//! and a fixed-point approximation on cycles.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Convergence threshold on the max-norm message delta between rounds.
pub const MSG_TOLERANCE: f64 = 1e-9;
/// Marginal differences below this are treated as exact ties.
const TIE_EPS: f64 = 1e-9;
/// Enumeration guard for the brute-force oracle (2^20 joint states).
const BRUTE_FORCE_VAR_LIMIT: usize = 20;

/// The two possible agent actions. Index 0 is Stop, index 1 is Move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Stop,
    Move,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Stop, Action::Move];

    pub fn index(self) -> usize {
        match self {
            Action::Stop => 0,
            Action::Move => 1,
        }
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 { Action::Stop } else { Action::Move }
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::Stop => "stop",
            Action::Move => "move",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub usize);

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
}

/// An agent's utility node. `own` is the agent's own variable and is always
/// part of the scope; `beta` is the local preference per action (stop, move).
#[derive(Debug, Clone)]
pub struct Factor {
    pub name: String,
    pub own: VarId,
    pub scope: Vec<VarId>,
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaxSumError {
    InvalidGraph(String),
    IncompleteScope { factor: String },
    MissingEdge,
    TooLarge { variables: usize },
    BadParameters(String),
}

impl fmt::Display for MaxSumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxSumError::InvalidGraph(why) => write!(f, "invalid factor graph: {why}"),
            MaxSumError::IncompleteScope { factor } => {
                write!(f, "joint state does not cover the scope of factor `{factor}`")
            }
            MaxSumError::MissingEdge => write!(f, "no such variable-factor edge"),
            MaxSumError::TooLarge { variables } => {
                write!(f, "{variables} variables exceed the enumeration limit")
            }
            MaxSumError::BadParameters(why) => write!(f, "bad parameters: {why}"),
        }
    }
}

impl core::error::Error for MaxSumError {}

/// Bipartite factor graph over binary action variables.
#[derive(Debug, Clone, Default)]
pub struct FactorGraph {
    vars: Vec<Variable>,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new() -> Self {
        FactorGraph::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> VarId {
        self.vars.push(Variable { name: name.into() });
        VarId(self.vars.len() - 1)
    }

    /// Adds the utility factor of the agent owning `own`. `others` is the
    /// rest of the scope; `own` must not be repeated there.
    pub fn add_factor(
        &mut self,
        name: impl Into<String>,
        own: VarId,
        others: &[VarId],
        beta: [f64; 2],
    ) -> Result<FactorId, MaxSumError> {
        let name = name.into();
        if own.0 >= self.vars.len() {
            return Err(MaxSumError::InvalidGraph(format!("factor `{name}` owns unknown variable")));
        }
        let mut scope = vec![own];
        for &v in others {
            if v.0 >= self.vars.len() {
                return Err(MaxSumError::InvalidGraph(format!(
                    "factor `{name}` scopes unknown variable"
                )));
            }
            if scope.contains(&v) {
                return Err(MaxSumError::InvalidGraph(format!(
                    "factor `{name}` scopes a variable twice"
                )));
            }
            scope.push(v);
        }
        if !beta[0].is_finite() || !beta[1].is_finite() {
            return Err(MaxSumError::InvalidGraph(format!("factor `{name}` has non-finite beta")));
        }
        self.factors.push(Factor { name, own, scope, beta });
        Ok(FactorId(self.factors.len() - 1))
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Number of variable-factor links (Σ scope sizes).
    pub fn edge_count(&self) -> usize {
        self.factors.iter().map(|f| f.scope.len()).sum()
    }

    /// Links that cross agent boundaries: every scope entry other than the
    /// factor's own variable. Only these carry physical messages; a factor
    /// talking to its own variable is in-process computation.
    pub fn inter_agent_edges(&self) -> usize {
        self.factors.iter().map(|f| f.scope.len() - 1).sum()
    }

    /// True when the bipartite variable/factor graph contains no cycle.
    pub fn is_acyclic(&self) -> bool {
        // union-find over vars (0..n) and factors (n..n+m)
        let n = self.vars.len();
        let mut parent: Vec<usize> = (0..n + self.factors.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (fi, f) in self.factors.iter().enumerate() {
            for &v in &f.scope {
                let a = find(&mut parent, v.0);
                let b = find(&mut parent, n + fi);
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }

    pub fn validate(&self) -> Result<(), MaxSumError> {
        for f in &self.factors {
            if !f.scope.contains(&f.own) {
                return Err(MaxSumError::InvalidGraph(format!(
                    "factor `{}` does not scope its own variable",
                    f.name
                )));
            }
        }
        Ok(())
    }
}

/// Local utility of one factor under a joint state covering its scope:
/// beta(own action) minus 1 per scope neighbor that picks Move while the
/// own variable also picks Move.
pub fn local_utility(
    graph: &FactorGraph,
    factor: FactorId,
    states: &BTreeMap<VarId, Action>,
) -> Result<f64, MaxSumError> {
    let f = &graph.factors[factor.0];
    let own = *states
        .get(&f.own)
        .ok_or_else(|| MaxSumError::IncompleteScope { factor: f.name.clone() })?;
    let mut u = f.beta[own.index()];
    for &v in &f.scope {
        if v == f.own {
            continue;
        }
        let s = *states
            .get(&v)
            .ok_or_else(|| MaxSumError::IncompleteScope { factor: f.name.clone() })?;
        if own == Action::Move && s == Action::Move {
            u -= 1.0;
        }
    }
    Ok(u)
}

fn factor_utility(f: &Factor, pick: impl Fn(VarId) -> Action) -> f64 {
    let own = pick(f.own);
    let mut u = f.beta[own.index()];
    if own == Action::Move {
        for &v in &f.scope {
            if v != f.own && pick(v) == Action::Move {
                u -= 1.0;
            }
        }
    }
    u
}

/// Sum of all factor utilities under a full assignment.
pub fn total_utility(graph: &FactorGraph, actions: &[Action]) -> f64 {
    graph
        .factors
        .iter()
        .map(|f| factor_utility(f, |v| actions[v.0]))
        .sum()
}

/// Directed message tables, one value per action per edge. After every
/// round each message's two action values sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MsgTable {
    /// variable -> factor, indexed by flattened (factor, scope slot)
    zeta: Vec<[f64; 2]>,
    /// factor -> variable, same indexing
    gamma: Vec<[f64; 2]>,
    edge_offsets: Vec<usize>,
    pub rounds: usize,
}

impl MsgTable {
    pub fn new(graph: &FactorGraph) -> Self {
        let mut edge_offsets = Vec::with_capacity(graph.factors.len() + 1);
        let mut total = 0;
        for f in &graph.factors {
            edge_offsets.push(total);
            total += f.scope.len();
        }
        edge_offsets.push(total);
        MsgTable { zeta: vec![[0.0; 2]; total], gamma: vec![[0.0; 2]; total], edge_offsets, rounds: 0 }
    }

    fn edge(&self, graph: &FactorGraph, factor: FactorId, var: VarId) -> Option<usize> {
        let f = &graph.factors[factor.0];
        let slot = f.scope.iter().position(|&v| v == var)?;
        Some(self.edge_offsets[factor.0] + slot)
    }

    pub fn zeta(&self, graph: &FactorGraph, var: VarId, factor: FactorId) -> Option<[f64; 2]> {
        self.edge(graph, factor, var).map(|e| self.zeta[e])
    }

    pub fn gamma(&self, graph: &FactorGraph, factor: FactorId, var: VarId) -> Option<[f64; 2]> {
        self.edge(graph, factor, var).map(|e| self.gamma[e])
    }
}

fn recenter(mut m: [f64; 2]) -> [f64; 2] {
    let mean = (m[0] + m[1]) / 2.0;
    m[0] -= mean;
    m[1] -= mean;
    m
}

/// Variable-to-factor message: sum of incoming factor messages excluding the
/// destination, recentered so the two action values sum to zero (the
/// normalization scalar of the update rule).
pub fn msg_var_to_fn(
    graph: &FactorGraph,
    table: &MsgTable,
    var: VarId,
    factor: FactorId,
) -> Result<[f64; 2], MaxSumError> {
    table.edge(graph, factor, var).ok_or(MaxSumError::MissingEdge)?;
    let mut out = [0.0; 2];
    for fi in 0..graph.factors.len() {
        if fi == factor.0 {
            continue;
        }
        if let Some(g) = table.gamma(graph, FactorId(fi), var) {
            out[0] += g[0];
            out[1] += g[1];
        }
    }
    Ok(recenter(out))
}

/// Factor-to-variable message: for each action of the destination variable,
/// the maximum over joint assignments of the remaining scope variables of
/// the factor utility plus their incoming variable messages.
pub fn msg_fn_to_var(
    graph: &FactorGraph,
    table: &MsgTable,
    factor: FactorId,
    var: VarId,
) -> Result<[f64; 2], MaxSumError> {
    let f = &graph.factors[factor.0];
    if !f.scope.contains(&var) {
        return Err(MaxSumError::MissingEdge);
    }
    let others: Vec<VarId> = f.scope.iter().copied().filter(|&v| v != var).collect();
    let mut out = [f64::NEG_INFINITY; 2];
    for action in Action::ALL {
        let combos: u32 = 1 << others.len();
        for mask in 0..combos {
            let pick = |v: VarId| -> Action {
                if v == var {
                    action
                } else {
                    let slot = others.iter().position(|&o| o == v).unwrap();
                    Action::from_index(((mask >> slot) & 1) as usize)
                }
            };
            let mut value = factor_utility(f, pick);
            for (slot, &o) in others.iter().enumerate() {
                let z = table.zeta(graph, o, factor).unwrap();
                value += z[((mask >> slot) & 1) as usize];
            }
            if value > out[action.index()] {
                out[action.index()] = value;
            }
        }
    }
    Ok(recenter(out))
}

/// Joint action choice produced by a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub actions: Vec<Action>,
    pub converged: bool,
    /// Message rounds executed (0 for the enumeration oracle).
    pub iterations: usize,
}

impl Assignment {
    pub fn action(&self, v: VarId) -> Action {
        self.actions[v.0]
    }
}

/// Runs synchronous max-sum rounds until the largest message change drops
/// below `MSG_TOLERANCE` or `max_iters` is reached.
///
/// Decoding takes the per-variable argmax of the final marginals with a
/// deterministic Stop-preferring tie-break; exactly tied variables are
/// settled jointly (see `decode`) so that tree-structured graphs decode to
/// an exact optimum even when several exist.
pub fn run_maxsum(
    graph: &FactorGraph,
    max_iters: usize,
    damping: f64,
) -> Result<Assignment, MaxSumError> {
    run_inner(graph, max_iters, damping, None)
}

/// Same as `run_maxsum`, appending one line per directed message per round:
/// `round=<k> edge=<from>-><to> stop=<v> move=<v>`.
pub fn run_maxsum_traced(
    graph: &FactorGraph,
    max_iters: usize,
    damping: f64,
    trace: &mut Vec<String>,
) -> Result<Assignment, MaxSumError> {
    run_inner(graph, max_iters, damping, Some(trace))
}

fn run_inner(
    graph: &FactorGraph,
    max_iters: usize,
    damping: f64,
    mut trace: Option<&mut Vec<String>>,
) -> Result<Assignment, MaxSumError> {
    graph.validate()?;
    if max_iters == 0 {
        return Err(MaxSumError::BadParameters("max_iters must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&damping) {
        return Err(MaxSumError::BadParameters("damping must lie in [0, 1)".into()));
    }
    if graph.var_count() == 0 {
        return Ok(Assignment { actions: Vec::new(), converged: true, iterations: 0 });
    }

    let mut table = MsgTable::new(graph);
    let mut converged = false;
    let mut rounds = 0;
    while rounds < max_iters {
        let mut next = table.clone();
        let mut delta: f64 = 0.0;
        for (fi, f) in graph.factors.iter().enumerate() {
            for (slot, &v) in f.scope.iter().enumerate() {
                let e = table.edge_offsets[fi] + slot;
                let z = msg_var_to_fn(graph, &table, v, FactorId(fi))?;
                let g = msg_fn_to_var(graph, &table, FactorId(fi), v)?;
                for a in 0..2 {
                    let zd = (1.0 - damping) * z[a] + damping * table.zeta[e][a];
                    let gd = (1.0 - damping) * g[a] + damping * table.gamma[e][a];
                    delta = delta.max(abs(zd - table.zeta[e][a])).max(abs(gd - table.gamma[e][a]));
                    next.zeta[e][a] = zd;
                    next.gamma[e][a] = gd;
                }
            }
        }
        rounds += 1;
        table = next;
        table.rounds = rounds;
        if let Some(t) = trace.as_deref_mut() {
            dump_round(graph, &table, rounds, t);
        }
        if delta < MSG_TOLERANCE {
            converged = true;
            break;
        }
    }

    let marginals = marginals(graph, &table);
    let actions = decode(graph, &marginals);
    Ok(Assignment { actions, converged, iterations: rounds })
}

fn abs(x: f64) -> f64 {
    if x < 0.0 { -x } else { x }
}

fn dump_round(graph: &FactorGraph, table: &MsgTable, round: usize, out: &mut Vec<String>) {
    for (fi, f) in graph.factors.iter().enumerate() {
        for (slot, &v) in f.scope.iter().enumerate() {
            let e = table.edge_offsets[fi] + slot;
            let var = &graph.vars[v.0].name;
            out.push(format!(
                "round={round} edge={}->{} stop={:.6} move={:.6}",
                var, f.name, table.zeta[e][0], table.zeta[e][1]
            ));
            out.push(format!(
                "round={round} edge={}->{} stop={:.6} move={:.6}",
                f.name, var, table.gamma[e][0], table.gamma[e][1]
            ));
        }
    }
}

/// Per-variable marginal: sum of incoming factor messages.
pub fn marginals(graph: &FactorGraph, table: &MsgTable) -> Vec<[f64; 2]> {
    let mut m = vec![[0.0; 2]; graph.var_count()];
    for (fi, f) in graph.factors.iter().enumerate() {
        for (slot, &v) in f.scope.iter().enumerate() {
            let e = table.edge_offsets[fi] + slot;
            m[v.0][0] += table.gamma[e][0];
            m[v.0][1] += table.gamma[e][1];
        }
    }
    m
}

/// Decodes marginals into actions. Unambiguous variables take their argmax.
/// Exactly tied variables are resolved together: enumerate their joint
/// choices, keep the best total utility, and among equals prefer the
/// lexicographically most-Stop assignment (Stop wins ties, variable order).
fn decode(graph: &FactorGraph, marginals: &[[f64; 2]]) -> Vec<Action> {
    let mut actions = vec![Action::Stop; marginals.len()];
    let mut tied = Vec::new();
    for (i, m) in marginals.iter().enumerate() {
        let diff = m[1] - m[0];
        if diff > TIE_EPS {
            actions[i] = Action::Move;
        } else if diff >= -TIE_EPS {
            tied.push(i);
        }
    }
    if tied.is_empty() || tied.len() > BRUTE_FORCE_VAR_LIMIT {
        return actions;
    }
    let k = tied.len();
    let mut best = actions.clone();
    let mut best_total = f64::NEG_INFINITY;
    for mask in 0u32..(1 << k) {
        let mut candidate = actions.clone();
        for (slot, &vi) in tied.iter().enumerate() {
            // first tied variable on the most significant bit: mask order is
            // then lexicographic with Stop sorting first
            candidate[vi] = Action::from_index(((mask >> (k - 1 - slot)) & 1) as usize);
        }
        let total = total_utility(graph, &candidate);
        if total > best_total {
            best_total = total;
            best = candidate;
        }
    }
    best
}

/// Exact argmax of the summed utility by enumeration over all joint states.
/// Ties break by the same deterministic rule as `run_maxsum` (most-Stop,
/// lexicographic in variable order).
pub fn brute_force_optimum(graph: &FactorGraph) -> Result<Assignment, MaxSumError> {
    graph.validate()?;
    let n = graph.var_count();
    if n > BRUTE_FORCE_VAR_LIMIT {
        return Err(MaxSumError::TooLarge { variables: n });
    }
    if n == 0 {
        return Ok(Assignment { actions: Vec::new(), converged: true, iterations: 0 });
    }
    let mut best = vec![Action::Stop; n];
    let mut best_total = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let candidate: Vec<Action> = (0..n)
            .map(|i| Action::from_index(((mask >> (n - 1 - i)) & 1) as usize))
            .collect();
        let total = total_utility(graph, &candidate);
        if total > best_total {
            best_total = total;
            best = candidate;
        }
    }
    Ok(Assignment { actions: best, converged: true, iterations: 0 })
}
