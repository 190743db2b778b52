//! Configuration graph over every valid configuration, up to agent
//! permutation, and its bottom strongly connected components.

use std::collections::HashMap;

use serde::Serialize;

use crate::engine::detect_correct;
use crate::error::{Result, SimError};
use crate::oracle::branches::for_each_branch;
use crate::oracle::states::Enumerable;
use crate::protocols::ProtocolKind;

pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// Markov chain of the uniform scheduler on configurations, canonicalized as
/// sorted multisets of state indices.
#[derive(Debug, Clone)]
pub struct ConfigGraph<S> {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub scaled: bool,
    /// The state alphabet; nodes refer to states by position.
    pub states: Vec<S>,
    nodes: Vec<u32>,
    index: HashMap<Box<[u32]>, u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    probs: Vec<f64>,
    pub correct: Vec<bool>,
    /// The closed-form silence predicate.
    pub silent: Vec<bool>,
    /// No ordered pair and no random outcome changes any agent.
    pub inert: Vec<bool>,
}

/// `C(s + n - 1, n)`, saturating.
pub fn multiset_count(s: usize, n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = match c.checked_mul(s as u128 + i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Number of agent orderings of a sorted multiset.
fn orderings(node: &[u32]) -> u128 {
    let mut total: u128 = 1;
    let mut run = 0u128;
    for (i, x) in node.iter().enumerate() {
        run = if i > 0 && node[i - 1] == *x { run + 1 } else { 1 };
        total = total * (i as u128 + 1) / run;
    }
    total
}

fn next_multiset(cur: &mut [u32], alphabet: u32) -> bool {
    let n = cur.len();
    for i in (0..n).rev() {
        if cur[i] + 1 < alphabet {
            let v = cur[i] + 1;
            for x in &mut cur[i..] {
                *x = v;
            }
            return true;
        }
    }
    false
}

pub fn build_config_graph<P: Enumerable>(protocol: &P, budget: u128) -> Result<ConfigGraph<P::State>> {
    let params = protocol.params();
    let n = params.n;
    let states = protocol.state_space()?;
    let count = multiset_count(states.len(), n);
    if count > budget {
        return Err(SimError::Capacity { count, budget });
    }
    let state_index: HashMap<&P::State, u32> = states.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();

    let mut nodes = Vec::with_capacity(count as usize * n);
    let mut index = HashMap::with_capacity(count as usize);
    let mut cur = vec![0u32; n];
    loop {
        index.insert(cur.clone().into_boxed_slice(), (nodes.len() / n) as u32);
        nodes.extend_from_slice(&cur);
        if !next_multiset(&mut cur, states.len() as u32) {
            break;
        }
    }
    let node_count = nodes.len() / n;

    let pair_weight = 1.0 / (n * (n - 1)) as f64;
    let mut offsets = Vec::with_capacity(node_count + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    let mut probs = Vec::new();
    let mut correct = Vec::with_capacity(node_count);
    let mut silent = Vec::with_capacity(node_count);
    let mut inert = Vec::with_capacity(node_count);
    let mut out: Vec<(u32, f64)> = Vec::new();
    let mut succ = vec![0u32; n];

    for v in 0..node_count {
        let node = &nodes[v * n..(v + 1) * n];
        let config: Vec<P::State> = node.iter().map(|&i| states[i as usize].clone()).collect();
        correct.push(detect_correct(protocol, &config));
        silent.push(protocol.is_silent(&config)?);

        // distinct states with multiplicities; ordered pairs of agents holding
        // the same two states behave identically
        let mut kinds: Vec<(usize, u32)> = Vec::new();
        for (pos, &x) in node.iter().enumerate() {
            match kinds.last_mut() {
                Some((_, m)) if node[pos - 1] == x => *m += 1,
                _ => kinds.push((pos, 1)),
            }
        }
        out.clear();
        let mut is_inert = true;
        for &(pa, ma) in &kinds {
            for &(pb, mb) in &kinds {
                let pairs = if pa == pb { ma * (ma - 1) } else { ma * mb };
                if pairs == 0 {
                    continue;
                }
                // responder position: the next copy when both hold the same state
                let pb = if pa == pb { pa + 1 } else { pb };
                let (sa, sb) = (&config[pa], &config[pb]);
                let weight = pairs as f64 * pair_weight;
                for_each_branch(
                    |r| {
                        let (mut a, mut b) = (sa.clone(), sb.clone());
                        protocol.interact(&mut a, &mut b, r)?;
                        protocol.check_state(&a).and_then(|_| protocol.check_state(&b))?;
                        Ok((a, b))
                    },
                    |(a, b), p| {
                        if (&a, &b) != (sa, sb) {
                            is_inert = false;
                        }
                        succ.copy_from_slice(node);
                        succ[pa] = state_index[&a];
                        succ[pb] = state_index[&b];
                        succ.sort_unstable();
                        let t = index[succ.as_slice()];
                        out.push((t, weight * p));
                    },
                )?;
            }
        }
        out.sort_unstable_by_key(|e| e.0);
        let mut last: Option<u32> = None;
        for &(t, p) in &out {
            if last == Some(t) {
                *probs.last_mut().unwrap() += p;
            } else {
                targets.push(t);
                probs.push(p);
                last = Some(t);
            }
        }
        offsets.push(targets.len());
        inert.push(is_inert);
    }

    Ok(ConfigGraph {
        protocol: protocol.kind(),
        n,
        scaled: params.scaled,
        states,
        nodes,
        index,
        offsets,
        targets,
        probs,
        correct,
        silent,
        inert,
    })
}

impl<S: Clone + Eq + std::hash::Hash> ConfigGraph<S> {
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn node(&self, v: usize) -> &[u32] {
        &self.nodes[v * self.n..(v + 1) * self.n]
    }

    pub fn configuration(&self, v: usize) -> Vec<S> {
        self.node(v).iter().map(|&i| self.states[i as usize].clone()).collect()
    }

    /// Node of an agent-indexed configuration, if all its states are valid.
    pub fn index_of(&self, config: &[S]) -> Option<usize> {
        if config.len() != self.n {
            return None;
        }
        let mut key = Vec::with_capacity(self.n);
        for s in config {
            key.push(self.states.iter().position(|x| x == s)? as u32);
        }
        key.sort_unstable();
        self.index.get(key.as_slice()).map(|&v| v as usize)
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.probs[r])
            .map(|(&t, &p)| (t as usize, p))
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Agent-indexed configurations represented by node `v`.
    pub fn orderings(&self, v: usize) -> u128 {
        orderings(self.node(v))
    }

    pub fn tuple_count(&self) -> u128 {
        (0..self.node_count()).map(|v| self.orderings(v)).sum()
    }

    pub fn silent_count(&self) -> usize {
        self.silent.iter().filter(|&&s| s).count()
    }

    pub fn silent_tuple_count(&self) -> u128 {
        (0..self.node_count()).filter(|&v| self.silent[v]).map(|v| self.orderings(v)).sum()
    }

    /// Strongly connected component of every node, and the component count.
    pub fn components(&self) -> (Vec<u32>, usize) {
        tarjan(self.node_count(), &self.offsets, &self.targets)
    }

    /// Nodes from which some node in `set` is reachable.
    pub fn can_reach(&self, set: &[bool]) -> Vec<bool> {
        let count = self.node_count();
        let mut rev_offsets = vec![0usize; count + 1];
        for &t in &self.targets {
            rev_offsets[t as usize + 1] += 1;
        }
        for i in 0..count {
            rev_offsets[i + 1] += rev_offsets[i];
        }
        let mut fill = rev_offsets.clone();
        let mut rev = vec![0u32; self.targets.len()];
        for v in 0..count {
            for &t in &self.targets[self.offsets[v]..self.offsets[v + 1]] {
                rev[fill[t as usize]] = v as u32;
                fill[t as usize] += 1;
            }
        }
        let mut seen = set.to_vec();
        let mut stack: Vec<usize> = (0..count).filter(|&v| set[v]).collect();
        while let Some(v) = stack.pop() {
            for &u in &rev[rev_offsets[v]..rev_offsets[v + 1]] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u as usize);
                }
            }
        }
        seen
    }

    /// Nodes reachable from `start`, not expanding past `stop` nodes.
    pub fn reachable_from(&self, start: usize, stop: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if stop[v] {
                continue;
            }
            for (t, _) in self.successors(v) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// Iterative Tarjan over a CSR graph.
fn tarjan(count: usize, offsets: &[usize], targets: &[u32]) -> (Vec<u32>, usize) {
    const UNSEEN: u32 = u32::MAX;
    let mut order = vec![UNSEEN; count];
    let mut low = vec![0u32; count];
    let mut comp = vec![UNSEEN; count];
    let mut on_stack = vec![false; count];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next = 0u32;
    let mut comps = 0usize;

    for root in 0..count {
        if order[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, offsets[root]));
        order[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let v = v as usize;
            if *edge < offsets[v + 1] {
                let w = targets[*edge] as usize;
                *edge += 1;
                if order[w] == UNSEEN {
                    order[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(order[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == order[v] {
                loop {
                    let w = stack.pop().unwrap() as usize;
                    on_stack[w] = false;
                    comp[w] = comps as u32;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    (comp, comps)
}

/// A reachable terminal component that is not correct.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// Lowest-indexed configuration from which the component is reachable.
    pub start: Vec<String>,
    /// An incorrect configuration inside the terminal component.
    pub terminal_member: Vec<String>,
    pub terminal_scc_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub ok: bool,
    /// Configurations up to agent permutation.
    pub node_count: usize,
    /// Agent-indexed configurations.
    pub tuple_count: u128,
    pub edge_count: usize,
    pub scc_count: usize,
    pub terminal_scc_count: usize,
    /// Silent configurations up to agent permutation.
    pub silent_configs: usize,
    pub silent_tuples: u128,
    /// Run with ceilings or name space reduced below their defaults.
    pub scaled: bool,
    pub counterexample: Option<Counterexample>,
}

/// Probability-1 stabilization: every terminal component consists of correct
/// configurations only.
pub fn verify_self_stabilizing<S>(graph: &ConfigGraph<S>) -> VerificationReport
where
    S: Clone + Eq + std::hash::Hash + std::fmt::Debug,
{
    let (comp, scc_count) = graph.components();
    let count = graph.node_count();
    let mut terminal = vec![true; scc_count];
    let mut all_correct = vec![true; scc_count];
    for v in 0..count {
        let c = comp[v] as usize;
        all_correct[c] &= graph.correct[v];
        if graph.successors(v).any(|(t, _)| comp[t] != comp[v]) {
            terminal[c] = false;
        }
    }
    let terminal_scc_count = terminal.iter().filter(|&&t| t).count();
    let bad = (0..count).find(|&v| terminal[comp[v] as usize] && !graph.correct[v]);

    let listing = |v: usize| -> Vec<String> { graph.configuration(v).iter().map(|s| format!("{s:?}")).collect() };
    let counterexample = bad.map(|member| {
        let c = comp[member];
        let in_comp: Vec<bool> = comp.iter().map(|&x| x == c).collect();
        let reach = graph.can_reach(&in_comp);
        let start = reach.iter().position(|&r| r).unwrap_or(member);
        Counterexample {
            start: listing(start),
            terminal_member: listing(member),
            terminal_scc_size: in_comp.iter().filter(|&&x| x).count(),
        }
    });

    VerificationReport {
        protocol: graph.protocol,
        n: graph.n,
        ok: counterexample.is_none(),
        node_count: count,
        tuple_count: graph.tuple_count(),
        edge_count: graph.edge_count(),
        scc_count,
        terminal_scc_count,
        silent_configs: graph.silent_count(),
        silent_tuples: graph.silent_tuple_count(),
        scaled: graph.scaled,
        counterexample,
    }
}
