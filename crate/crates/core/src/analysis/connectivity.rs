//! Thresholded reconstruction-vector connectivity between layers.

use std::collections::BTreeSet;

use crate::chain::ChainNetwork;
use crate::error::{Result, SvqError};

/// Reconstruction matrix of one stage with its threshold mask.
///
/// Row `y` is the reconstruction vector of code `y` (a node in layer `l`),
/// column `k` a node in layer `l - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageConnectivity {
    pub m: usize,
    pub input_dim: usize,
    pub recon: Vec<f64>,
    pub tau: f64,
    pub mask: Vec<bool>,
}

impl StageConnectivity {
    pub fn value(&self, node: usize, input: usize) -> f64 {
        self.recon[node * self.input_dim + input]
    }

    pub fn kept(&self, node: usize, input: usize) -> bool {
        self.mask[node * self.input_dim + input]
    }

    pub fn kept_edges(&self) -> usize {
        self.mask.iter().filter(|&&k| k).count()
    }

    /// Inputs feeding `node` through kept edges.
    pub fn upstream(&self, node: usize) -> Vec<usize> {
        (0..self.input_dim).filter(|&k| self.kept(node, k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.recon.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    pub stages: Vec<StageConnectivity>,
    /// Display order of every layer `0..=L`: position `i` shows original node
    /// `layer_orders[l][i]`. Layer 0 is always the identity.
    pub layer_orders: Vec<Vec<usize>>,
}

fn build(chain: &ChainNetwork, taus: &[f64]) -> ConnectivityGraph {
    let stages: Vec<StageConnectivity> = chain
        .stages()
        .iter()
        .zip(taus)
        .map(|(s, &tau)| StageConnectivity {
            m: s.m(),
            input_dim: s.input_dim(),
            recon: s.recon().to_vec(),
            tau,
            mask: s.recon().iter().map(|v| v.abs() >= tau).collect(),
        })
        .collect();
    let layer_orders = chain.layer_sizes().iter().map(|&n| (0..n).collect()).collect();
    ConnectivityGraph {
        stages,
        layer_orders,
    }
}

/// Keeps reconstruction components with `|value| >= tau` in every stage.
pub fn threshold_connectivity(chain: &ChainNetwork, tau: f64) -> Result<ConnectivityGraph> {
    if !(tau > 0.0) {
        return Err(SvqError::invalid("tau", "threshold must be positive"));
    }
    Ok(build(chain, &vec![tau; chain.num_stages()]))
}

/// Per-stage threshold `fraction * max |recon component|` of that stage.
pub fn threshold_connectivity_relative(
    chain: &ChainNetwork,
    fraction: f64,
) -> Result<ConnectivityGraph> {
    if !(fraction > 0.0) {
        return Err(SvqError::invalid("fraction", "threshold fraction must be positive"));
    }
    let taus: Vec<f64> = chain
        .stages()
        .iter()
        .map(|s| {
            let max = s.recon().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            // an all-zero stage keeps nothing
            if max > 0.0 {
                fraction * max
            } else {
                f64::MIN_POSITIVE
            }
        })
        .collect();
    Ok(build(chain, &taus))
}

impl ConnectivityGraph {
    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn kept_edge_counts(&self) -> Vec<usize> {
        self.stages.iter().map(StageConnectivity::kept_edges).collect()
    }

    /// Display position of every original node in layer `l`.
    pub fn positions(&self, layer: usize) -> Vec<usize> {
        let order = &self.layer_orders[layer];
        let mut pos = vec![0; order.len()];
        for (p, &node) in order.iter().enumerate() {
            pos[node] = p;
        }
        pos
    }

    /// Applies the display order to a chain's parameters. The returned
    /// chain computes the same function with relabelled nodes.
    pub fn apply_to_chain(&self, chain: &ChainNetwork) -> Result<ChainNetwork> {
        chain.permute_layers(&self.layer_orders[1..])
    }

    /// Groups of layer-`stage` nodes (1-based stage) that are connected
    /// through shared upstream nodes, in display order. Each entry is
    /// `(upstream nodes, nodes)` using original indices.
    pub fn blocks(&self, stage: usize) -> Vec<(BTreeSet<usize>, Vec<usize>)> {
        let sc = &self.stages[stage - 1];
        let mut blocks: Vec<(BTreeSet<usize>, Vec<usize>)> = Vec::new();
        for &node in &self.layer_orders[stage] {
            let up: BTreeSet<usize> = sc.upstream(node).into_iter().collect();
            match blocks.last_mut() {
                Some((prev, nodes)) if !up.is_empty() && !prev.is_disjoint(&up) => {
                    prev.extend(up);
                    nodes.push(node);
                }
                _ => blocks.push((up, vec![node])),
            }
        }
        blocks
    }
}

/// Reorders every non-input layer so that nodes connected to the same
/// upstream nodes sit next to each other.
///
/// Nodes of layer `l` are grouped into connected components of the
/// bipartite kept-edge graph to layer `l - 1`. Components are sorted by the
/// smallest display position they touch upstream (nodes with no kept edges
/// go last), ties broken by smallest node index; nodes inside a component
/// are sorted the same way.
pub fn permute_for_clarity(graph: &ConnectivityGraph) -> ConnectivityGraph {
    let mut out = graph.clone();
    for l in 1..=graph.num_stages() {
        let sc = &graph.stages[l - 1];
        let up_pos = out.positions(l - 1);
        let m = sc.m;

        // union-find over layer-l nodes joined through shared inputs
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            let mut i = i;
            while parent[i] != r {
                let next = parent[i];
                parent[i] = r;
                i = next;
            }
            r
        }
        for k in 0..sc.input_dim {
            let mut first: Option<usize> = None;
            for y in 0..m {
                if sc.kept(y, k) {
                    match first {
                        None => first = Some(y),
                        Some(f) => {
                            let (a, b) = (find(&mut parent, f), find(&mut parent, y));
                            if a != b {
                                parent[a.max(b)] = a.min(b);
                            }
                        }
                    }
                }
            }
        }

        let node_key = |y: usize| -> usize {
            sc.upstream(y)
                .into_iter()
                .map(|k| up_pos[k])
                .min()
                .unwrap_or(usize::MAX)
        };
        let mut comp_key = vec![(usize::MAX, usize::MAX); m];
        for y in 0..m {
            let r = find(&mut parent, y);
            let k = node_key(y);
            let entry = &mut comp_key[r];
            *entry = (entry.0.min(k), entry.1.min(y));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&y| {
            let r = find(&mut parent, y);
            let (ck, cmin) = comp_key[r];
            // isolated nodes form their own component keyed by their index
            (ck, cmin, node_key(y), y)
        });
        out.layer_orders[l] = order;
    }
    out
}
