//! Bounded enumeration of graph instances.
//!
//! Instances are generated level by level, where a level fixes the largest
//! per-type node count, the largest per-type edge count and the number of
//! small integers admitted into the value domain. Each instance is produced
//! at exactly one level, in a deterministic order. Within a type, default
//! keys are strictly increasing, so no two generated instances differ only
//! by a renaming of element ids.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, ElementId, GraphInstance, Node};
use crate::par::{self, Execution};
use crate::schema::GraphSchema;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnumBounds {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_values: usize,
    /// Wall-clock limit in seconds; `None` for no limit.
    pub timeout_secs: Option<f64>,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds { max_nodes: 2, max_edges: 2, max_values: 3, timeout_secs: Some(60.0) }
    }
}

impl EnumBounds {
    pub fn new(max_nodes: usize, max_edges: usize, max_values: usize) -> Self {
        EnumBounds { max_nodes, max_edges, max_values, timeout_secs: None }
    }

    pub fn timeout(&self) -> Option<Duration> {
        self.timeout_secs.map(Duration::from_secs_f64)
    }
}

/// One level of the iterative deepening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level {
    pub nodes: usize,
    pub edges: usize,
    pub values: usize,
}

/// One element of a generated sequence: domain indices of its key values
/// and, for edges, the positions of its endpoints within their types.
#[derive(Debug, Clone)]
struct Elem {
    vals: Vec<usize>,
    ends: (usize, usize),
}

/// All element sequences of one type under some limit, smallest first.
#[derive(Debug)]
struct Seqs {
    seqs: Vec<Vec<Elem>>,
    ranks: Vec<usize>,
}

/// The instance space of a schema under bounds.
pub struct Space<'a> {
    gs: &'a GraphSchema,
    bounds: EnumBounds,
    /// Domain values in value order, each with the level that admits it.
    domain: Vec<(Value, usize)>,
}

impl<'a> Space<'a> {
    /// The value domain is `0..max_values` together with `constants`;
    /// constants are admitted from the first level on, the integer `i` from
    /// level `i + 1`.
    pub fn new(gs: &'a GraphSchema, bounds: EnumBounds, constants: &[Value]) -> Self {
        let mut domain: Vec<(Value, usize)> = Vec::new();
        for c in constants {
            if !c.is_null() && !domain.iter().any(|(v, _)| v == c) {
                domain.push((c.clone(), 0));
            }
        }
        for i in 0..bounds.max_values {
            let v = Value::Int(i as i64);
            if !domain.iter().any(|(d, _)| d == &v) {
                domain.push((v, i + 1));
            }
        }
        domain.sort_by(|a, b| a.0.cmp(&b.0));
        Space { gs, bounds, domain }
    }

    pub fn domain(&self) -> Vec<Value> {
        self.domain.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn levels(&self) -> Vec<Level> {
        let mut out = Vec::new();
        for nodes in 0..=self.bounds.max_nodes {
            for edges in 0..=if nodes == 0 || self.gs.edges.is_empty() { 0 } else { self.bounds.max_edges } {
                for values in 0..=self.bounds.max_values {
                    out.push(Level { nodes, edges, values });
                }
            }
        }
        out
    }

    fn available(&self, level: Level) -> Vec<usize> {
        (0..self.domain.len()).filter(|&i| self.domain[i].1 <= level.values).collect()
    }

    fn seqs(&self, keys: usize, limit: usize, ends: (usize, usize), avail: &[usize]) -> Seqs {
        let mut seqs = vec![Vec::new()];
        let mut frontier: Vec<Vec<Elem>> = vec![Vec::new()];
        let mut choices: Vec<Elem> = Vec::new();
        // Non-default key values and endpoints for one element.
        let mut others: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 1..keys {
            others = others
                .into_iter()
                .flat_map(|o| {
                    avail.iter().map(move |&a| {
                        let mut o = o.clone();
                        o.push(a);
                        o
                    })
                })
                .collect();
        }
        for s in 0..ends.0.max(1) {
            for t in 0..ends.1.max(1) {
                for o in &others {
                    choices.push(Elem { vals: o.clone(), ends: (s, t) });
                }
            }
        }
        for _ in 0..limit {
            let mut next = Vec::new();
            for seq in &frontier {
                let start = match seq.last() {
                    Some(e) => avail.iter().position(|&a| a == e.vals[0]).unwrap() + 1,
                    None => 0,
                };
                for &d in &avail[start..] {
                    for c in &choices {
                        let mut vals = vec![d];
                        vals.extend(&c.vals);
                        let mut s = seq.clone();
                        s.push(Elem { vals, ends: c.ends });
                        next.push(s);
                    }
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
        }
        let ranks = seqs
            .iter()
            .map(|s| s.iter().flat_map(|e| e.vals.iter()).map(|&i| self.domain[i].1).max().unwrap_or(0))
            .collect();
        Seqs { seqs, ranks }
    }

    /// Node configurations of a level: one sequence index per node type,
    /// restricted to those whose largest type has exactly `level.nodes`
    /// nodes.
    fn node_configs(&self, level: Level, node_seqs: &[Seqs]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for s in node_seqs {
            out = out
                .into_iter()
                .flat_map(|c: Vec<usize>| {
                    (0..s.seqs.len()).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        out.retain(|c| {
            c.iter().enumerate().map(|(t, &i)| node_seqs[t].seqs[i].len()).max().unwrap_or(0) == level.nodes
        });
        out
    }

    /// Visit every instance of one level, in order, until `f` returns
    /// `Some`.
    fn search_level<R, F>(&self, exec: Execution, level: Level, f: &F) -> Option<R>
    where
        R: Send,
        F: Fn(GraphInstance) -> Option<R> + Sync + Send,
    {
        let avail = self.available(level);
        if self.domain.iter().filter(|(_, r)| *r == level.values).count() == 0 && level.values > 0 {
            return None;
        }
        if self.gs.nodes.is_empty() && level.nodes > 0 {
            return None;
        }
        let node_seqs: Vec<Seqs> =
            self.gs.nodes.iter().map(|n| self.seqs(n.keys.len(), level.nodes, (0, 0), &avail)).collect();
        let configs = self.node_configs(level, &node_seqs);
        let node_index: HashMap<&str, usize> =
            self.gs.nodes.iter().enumerate().map(|(i, n)| (n.label.as_str(), i)).collect();
        let mut edge_cache: HashMap<(usize, usize, usize), Arc<Seqs>> = HashMap::new();
        let mut work = Vec::with_capacity(configs.len());
        for c in configs {
            let counts: Vec<usize> = c.iter().enumerate().map(|(t, &i)| node_seqs[t].seqs[i].len()).collect();
            let lists: Vec<Arc<Seqs>> = self
                .gs
                .edges
                .iter()
                .enumerate()
                .map(|(ei, e)| {
                    let ns = counts[node_index[e.src.as_str()]];
                    let nt = counts[node_index[e.tgt.as_str()]];
                    let limit = if ns == 0 || nt == 0 { 0 } else { level.edges };
                    edge_cache
                        .entry((ei, ns, nt))
                        .or_insert_with(|| Arc::new(self.seqs(e.keys.len(), limit, (ns, nt), &avail)))
                        .clone()
                })
                .collect();
            work.push((c, lists));
        }
        par::find_map_first(exec, &work, |(c, lists)| {
            let node_rank = c.iter().enumerate().map(|(t, &i)| node_seqs[t].ranks[i]).max().unwrap_or(0);
            let mut odo = vec![0usize; lists.len()];
            loop {
                let edges_max = odo.iter().zip(lists).map(|(&i, l)| l.seqs[i].len()).max().unwrap_or(0);
                let rank = odo.iter().zip(lists).map(|(&i, l)| l.ranks[i]).max().unwrap_or(0).max(node_rank);
                if edges_max == level.edges && rank == level.values {
                    let g = self.build(c, &node_seqs, &odo, lists);
                    if let Some(r) = f(g) {
                        return Some(r);
                    }
                }
                let mut k = lists.len();
                loop {
                    if k == 0 {
                        return None;
                    }
                    k -= 1;
                    odo[k] += 1;
                    if odo[k] < lists[k].seqs.len() {
                        break;
                    }
                    odo[k] = 0;
                }
            }
        })
    }

    fn build(&self, config: &[usize], node_seqs: &[Seqs], odo: &[usize], lists: &[Arc<Seqs>]) -> GraphInstance {
        let mut g = GraphInstance::default();
        let mut base: HashMap<&str, ElementId> = HashMap::new();
        for (t, nt) in self.gs.nodes.iter().enumerate() {
            base.insert(&nt.label, g.nodes.len() as ElementId);
            for e in &node_seqs[t].seqs[config[t]] {
                g.nodes.push(Node {
                    id: g.nodes.len() as ElementId,
                    label: nt.label.clone(),
                    props: nt.keys.iter().cloned().zip(e.vals.iter().map(|&i| self.domain[i].0.clone())).collect(),
                });
            }
        }
        for (t, et) in self.gs.edges.iter().enumerate() {
            for e in &lists[t].seqs[odo[t]] {
                g.edges.push(Edge {
                    id: g.edges.len() as ElementId,
                    label: et.label.clone(),
                    src: base[et.src.as_str()] + e.ends.0 as ElementId,
                    tgt: base[et.tgt.as_str()] + e.ends.1 as ElementId,
                    props: et.keys.iter().cloned().zip(e.vals.iter().map(|&i| self.domain[i].0.clone())).collect(),
                });
            }
        }
        g
    }

    /// The first `Some` of `f` over all instances in enumeration order.
    pub fn search<R, F>(&self, exec: Execution, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(GraphInstance) -> Option<R> + Sync + Send,
    {
        self.levels().into_iter().find_map(|l| self.search_level(exec, l, &f))
    }

    /// Every instance, in enumeration order.
    pub fn collect(&self) -> Vec<GraphInstance> {
        let out = std::sync::Mutex::new(Vec::new());
        self.search::<(), _>(Execution::Sequential, |g| {
            out.lock().unwrap().push(g);
            None
        });
        out.into_inner().unwrap()
    }

    /// The first `n` instances, in enumeration order.
    pub fn take(&self, n: usize) -> Vec<GraphInstance> {
        let out = std::sync::Mutex::new(Vec::new());
        self.search::<(), _>(Execution::Sequential, |g| {
            let mut v = out.lock().unwrap();
            v.push(g);
            (v.len() >= n).then_some(())
        });
        out.into_inner().unwrap()
    }
}

/// Every instance within `bounds` over `{0..max_values}`, in enumeration
/// order.
pub fn enumerate_graphs(gs: &GraphSchema, bounds: EnumBounds) -> Vec<GraphInstance> {
    Space::new(gs, bounds, &[]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn emp_dept() -> GraphSchema {
        serde_json::from_str(
            r#"{"nodes":[{"label":"EMP","keys":["id","name"]},{"label":"DEPT","keys":["dnum","dname"]}],
                "edges":[{"label":"WORK_AT","src":"EMP","tgt":"DEPT","keys":["wid"]}]}"#,
        )
        .unwrap()
    }

    fn self_loop() -> GraphSchema {
        serde_json::from_str(
            r#"{"nodes":[{"label":"A","keys":["k"]}],"edges":[{"label":"R","src":"A","tgt":"A","keys":["r","w"]}]}"#,
        )
        .unwrap()
    }

    /// Canonical form up to element-id renaming: nodes by label and
    /// properties, edges additionally by their endpoints' canonical forms.
    fn canon(g: &GraphInstance) -> Vec<String> {
        let node = |id| {
            let n = g.node(id).unwrap();
            format!("{}{:?}", n.label, n.props)
        };
        let mut out: Vec<String> = g.nodes.iter().map(|n| node(n.id)).collect();
        out.extend(g.edges.iter().map(|e| format!("{}{:?}{}{}", e.label, e.props, node(e.src), node(e.tgt))));
        out.sort();
        out
    }

    /// Generate every assignment of values and endpoints with no ordering
    /// constraint, keep the valid ones, and canonicalize.
    fn naive(gs: &GraphSchema, max_nodes: usize, max_edges: usize, values: usize) -> BTreeSet<Vec<String>> {
        let dom: Vec<Value> = (0..values as i64).map(Value::Int).collect();
        let tuples = |n: usize| -> Vec<Vec<Value>> {
            let mut out = vec![Vec::new()];
            for _ in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|t: Vec<Value>| {
                        dom.iter().map(move |v| {
                            let mut t = t.clone();
                            t.push(v.clone());
                            t
                        })
                    })
                    .collect();
            }
            out
        };
        let mut graphs = vec![GraphInstance::default()];
        for nt in &gs.nodes {
            let mut next = Vec::new();
            for g in &graphs {
                let mut partial = vec![g.clone()];
                next.extend(partial.iter().cloned());
                for _ in 0..max_nodes {
                    let mut grown = Vec::new();
                    for p in &partial {
                        for t in tuples(nt.keys.len()) {
                            let mut q = p.clone();
                            let id = q.nodes.len() as u64;
                            q.nodes.push(Node {
                                id,
                                label: nt.label.clone(),
                                props: nt.keys.iter().cloned().zip(t).collect(),
                            });
                            grown.push(q);
                        }
                    }
                    next.extend(grown.iter().cloned());
                    partial = grown;
                }
            }
            graphs = next;
        }
        for et in &gs.edges {
            let mut next = Vec::new();
            for g in &graphs {
                let srcs: Vec<u64> = g.nodes.iter().filter(|n| n.label == et.src).map(|n| n.id).collect();
                let tgts: Vec<u64> = g.nodes.iter().filter(|n| n.label == et.tgt).map(|n| n.id).collect();
                let mut partial = vec![g.clone()];
                next.push(g.clone());
                for _ in 0..max_edges {
                    let mut grown = Vec::new();
                    for p in &partial {
                        for &s in &srcs {
                            for &t in &tgts {
                                for vals in tuples(et.keys.len()) {
                                    let mut q = p.clone();
                                    let id = q.edges.len() as u64;
                                    q.edges.push(Edge {
                                        id,
                                        label: et.label.clone(),
                                        src: s,
                                        tgt: t,
                                        props: et.keys.iter().cloned().zip(vals).collect(),
                                    });
                                    grown.push(q);
                                }
                            }
                        }
                    }
                    next.extend(grown.iter().cloned());
                    partial = grown;
                }
            }
            graphs = next;
        }
        graphs.into_iter().filter(|g| g.violations(gs).is_empty()).map(|g| canon(&g)).collect()
    }

    fn check_against_naive(gs: &GraphSchema, n: usize, m: usize, v: usize) {
        let got = enumerate_graphs(gs, EnumBounds::new(n, m, v));
        for g in &got {
            assert!(g.violations(gs).is_empty(), "{g:?}");
        }
        let canon_got: BTreeSet<Vec<String>> = got.iter().map(canon).collect();
        assert_eq!(canon_got.len(), got.len(), "duplicates up to renaming");
        assert_eq!(canon_got, naive(gs, n, m, v));
    }

    #[test]
    fn single_node_type_counts() {
        let gs: GraphSchema = serde_json::from_str(r#"{"nodes":[{"label":"A","keys":["k"]}],"edges":[]}"#).unwrap();
        assert_eq!(enumerate_graphs(&gs, EnumBounds::new(1, 0, 1)).len(), 2);
        assert_eq!(enumerate_graphs(&gs, EnumBounds::new(0, 0, 0)), vec![GraphInstance::default()]);
        assert_eq!(enumerate_graphs(&emp_dept(), EnumBounds::new(0, 0, 0)).len(), 1);
    }

    #[test]
    fn emp_dept_at_unit_bounds() {
        // Four node configurations; only the one with both endpoints admits
        // an edge, which it may or may not have.
        assert_eq!(enumerate_graphs(&emp_dept(), EnumBounds::new(1, 1, 1)).len(), 5);
        check_against_naive(&emp_dept(), 1, 1, 1);
    }

    #[test]
    fn agrees_with_naive_generator() {
        check_against_naive(&emp_dept(), 1, 2, 2);
        check_against_naive(&emp_dept(), 2, 1, 2);
        check_against_naive(&self_loop(), 2, 2, 2);
    }

    #[test]
    fn constants_join_the_domain() {
        let gs: GraphSchema = serde_json::from_str(r#"{"nodes":[{"label":"A","keys":["k"]}],"edges":[]}"#).unwrap();
        let s = Space::new(&gs, EnumBounds::new(1, 0, 1), &[Value::Int(10), Value::str("x")]);
        assert_eq!(s.domain(), vec![Value::Int(0), Value::Int(10), Value::str("x")]);
        assert_eq!(s.collect().len(), 4);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let gs = self_loop();
        let s = Space::new(&gs, EnumBounds::new(2, 2, 2), &[]);
        let pick = |g: GraphInstance| (g.edges.len() == 2 && g.edges[0].src != g.edges[1].src).then_some(g);
        assert_eq!(s.search(Execution::Sequential, pick), s.search(Execution::Parallel, pick));
    }

    #[test]
    fn smaller_instances_come_first() {
        let all = enumerate_graphs(&emp_dept(), EnumBounds::new(2, 1, 2));
        let sizes: Vec<usize> = all
            .iter()
            .map(|g| ["EMP", "DEPT"].iter().map(|l| g.nodes.iter().filter(|n| &n.label == l).count()).max().unwrap())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }
}
