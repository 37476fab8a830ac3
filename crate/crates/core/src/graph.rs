//! Bipartite graph model: V-entities own outgoing links, W-entities collect
//! incoming degree. A directed graph is the special case where both sides
//! share one ID space (`n_v == n_w`), e.g. accounts following accounts.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Shape of the in-degree tail `P(X > x) = L(x) * (x / x_min)^(-1/gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    /// `L(x) = 1`: exact Pareto tail.
    ParetoPure,
    /// `L(x) = (1 + ln(x/x_min))^(1/(2*gamma))`: a logarithmic slowly varying
    /// factor on top of the Pareto tail. The exponent keeps the survival
    /// function monotone for every `gamma > 0`.
    ParetoLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDistribution {
    pub kind: TailKind,
    pub gamma: f64,
    pub x_min: f64,
}

impl TailDistribution {
    pub fn new(kind: TailKind, gamma: f64, x_min: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail exponent gamma must be finite and positive, got {gamma}"
            )));
        }
        if !(x_min.is_finite() && x_min >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "degree floor x_min must be finite and >= 1, got {x_min}"
            )));
        }
        Ok(TailDistribution { kind, gamma, x_min })
    }

    /// `P(X > x)`; equals 1 for `x <= x_min`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.x_min {
            return 1.0;
        }
        let r = x / self.x_min;
        let pareto = r.powf(-1.0 / self.gamma);
        match self.kind {
            TailKind::ParetoPure => pareto,
            TailKind::ParetoLog => pareto * (1.0 + r.ln()).powf(1.0 / (2.0 * self.gamma)),
        }
    }

    /// Inverse of `survival`: the x with `P(X > x) = u`, for `u` in (0, 1].
    pub fn quantile_from_survival(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u <= 1.0);
        match self.kind {
            TailKind::ParetoPure => self.x_min * u.powf(-self.gamma),
            TailKind::ParetoLog => {
                // Solve -t/gamma + beta*ln(1+t) = ln u for t = ln(x/x_min).
                // g is strictly decreasing and concave, so Newton from the
                // pure-Pareto start (left of the root) converges from below.
                let target = u.ln();
                let beta = 1.0 / (2.0 * self.gamma);
                let mut t = -self.gamma * target;
                for _ in 0..64 {
                    let g = -t / self.gamma + beta * t.ln_1p() - target;
                    if g.abs() < 1e-13 {
                        break;
                    }
                    let dg = -1.0 / self.gamma + beta / (1.0 + t);
                    t -= g / dg;
                }
                self.x_min * t.exp()
            }
        }
    }

    /// One continuous draw by inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // random::<f64>() lies in [0, 1); flip to a survival level in (0, 1].
        let u = 1.0 - rng.random::<f64>();
        self.quantile_from_survival(u)
    }
}

/// Immutable graph snapshot served by the metered API.
///
/// `out_adj` order is the pagination order seen by callers; the generator
/// leaves it uniformly shuffled. When `n_v == n_w` the graph is treated as
/// directed, with W-IDs aliasing V-IDs.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    n_v: u32,
    n_w: u32,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
    alive: Vec<bool>,
    alive_count: u32,
    source_seed: Option<u64>,
    external_ids: Option<Vec<u64>>,
}

impl BipartiteGraph {
    pub fn n_v(&self) -> u32 {
        self.n_v
    }

    pub fn n_w(&self) -> u32 {
        self.n_w
    }

    /// True when W-IDs alias V-IDs, i.e. the graph is directed.
    pub fn is_aliased(&self) -> bool {
        self.n_v == self.n_w
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_adj[v as usize]
    }

    pub fn in_neighbors(&self, w: u32) -> &[u32] {
        &self.in_adj[w as usize]
    }

    pub fn out_degree(&self, v: u32) -> u32 {
        self.out_adj[v as usize].len() as u32
    }

    pub fn in_degree(&self, w: u32) -> u32 {
        self.in_adj[w as usize].len() as u32
    }

    pub fn is_alive(&self, v: u32) -> bool {
        self.alive[v as usize]
    }

    pub fn alive_count(&self) -> u32 {
        self.alive_count
    }

    pub fn edge_count(&self) -> u64 {
        self.in_adj.iter().map(|s| s.len() as u64).sum()
    }

    pub fn seed(&self) -> Option<u64> {
        self.source_seed
    }

    /// Original ID of a densified entity, when the graph came from a plain
    /// edge list. Identity otherwise.
    pub fn external_id(&self, id: u32) -> u64 {
        match &self.external_ids {
            Some(map) => map[id as usize],
            None => id as u64,
        }
    }
}

/// Draw a graph: every W-entity's in-degree is an independent draw from
/// `dist` (floored, capped at the alive-source count) and its sources are a
/// uniform random subset of the alive V-entities of exactly that size.
/// Identical parameters and seed give byte-identical graphs.
pub fn generate(
    n_v: u32,
    n_w: u32,
    dist: &TailDistribution,
    dead_fraction: f64,
    seed: u64,
) -> Result<BipartiteGraph> {
    if n_v == 0 || n_w == 0 {
        return Err(Error::InvalidParameter(
            "graph sides must be non-empty".into(),
        ));
    }
    if !(0.0..1.0).contains(&dead_fraction) {
        return Err(Error::InvalidParameter(format!(
            "dead_fraction must lie in [0, 1), got {dead_fraction}"
        )));
    }
    if dist.x_min > n_v as f64 {
        return Err(Error::InfeasibleDegree {
            x_min: dist.x_min,
            n_v,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alive: Vec<bool> = (0..n_v)
        .map(|_| rng.random::<f64>() >= dead_fraction)
        .collect();
    let alive_count = alive.iter().filter(|&&a| a).count() as u32;
    let degrees: Vec<u32> = (0..n_w)
        .map(|_| {
            let x = dist.sample(&mut rng);
            x.floor().min(alive_count as f64) as u32
        })
        .collect();
    Ok(assemble(alive, alive_count, &degrees, Some(seed), &mut rng))
}

/// Like [`generate`] but with the in-degree sequence given explicitly.
/// Useful for planting known degree profiles.
pub fn generate_from_degrees(
    n_v: u32,
    in_degrees: &[u32],
    dead_fraction: f64,
    seed: u64,
) -> Result<BipartiteGraph> {
    if n_v == 0 || in_degrees.is_empty() {
        return Err(Error::InvalidParameter(
            "graph sides must be non-empty".into(),
        ));
    }
    if !(0.0..1.0).contains(&dead_fraction) {
        return Err(Error::InvalidParameter(format!(
            "dead_fraction must lie in [0, 1), got {dead_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alive: Vec<bool> = (0..n_v)
        .map(|_| rng.random::<f64>() >= dead_fraction)
        .collect();
    let alive_count = alive.iter().filter(|&&a| a).count() as u32;
    let degrees: Vec<u32> = in_degrees.iter().map(|&d| d.min(alive_count)).collect();
    Ok(assemble(alive, alive_count, &degrees, Some(seed), &mut rng))
}

/// Build a graph from an explicit edge list, keeping the given edge order
/// as the pagination order. `dead` lists V-IDs to mark dead. Duplicate
/// edges are rejected: hand-built fixtures should be exact.
pub fn from_edges(n_v: u32, n_w: u32, edges: &[(u32, u32)], dead: &[u32]) -> Result<BipartiteGraph> {
    if n_v == 0 || n_w == 0 {
        return Err(Error::InvalidParameter(
            "graph sides must be non-empty".into(),
        ));
    }
    let mut alive = vec![true; n_v as usize];
    for &v in dead {
        if v >= n_v {
            return Err(Error::OutOfRange(format!("dead V-ID {v} outside 0..{n_v}")));
        }
        alive[v as usize] = false;
    }
    let alive_count = alive.iter().filter(|&&a| a).count() as u32;
    let mut out_adj = vec![Vec::new(); n_v as usize];
    let mut in_adj = vec![Vec::new(); n_w as usize];
    let mut seen = HashSet::with_capacity(edges.len());
    for &(v, w) in edges {
        if v >= n_v {
            return Err(Error::OutOfRange(format!("edge source {v} outside 0..{n_v}")));
        }
        if w >= n_w {
            return Err(Error::OutOfRange(format!("edge target {w} outside 0..{n_w}")));
        }
        if !seen.insert((v, w)) {
            return Err(Error::InvalidParameter(format!("duplicate edge {v} -> {w}")));
        }
        out_adj[v as usize].push(w);
        in_adj[w as usize].push(v);
    }
    Ok(BipartiteGraph {
        n_v,
        n_w,
        out_adj,
        in_adj,
        alive,
        alive_count,
        source_seed: None,
        external_ids: None,
    })
}

fn assemble(
    alive: Vec<bool>,
    alive_count: u32,
    degrees: &[u32],
    seed: Option<u64>,
    rng: &mut ChaCha8Rng,
) -> BipartiteGraph {
    let n_v = alive.len() as u32;
    let alive_ids: Vec<u32> = (0..n_v).filter(|&v| alive[v as usize]).collect();
    let mut out_adj = vec![Vec::new(); n_v as usize];
    let mut in_adj = Vec::with_capacity(degrees.len());
    // Sparse Fisher-Yates over the alive indices, reset per W-entity.
    let mut displaced: HashMap<u32, u32> = HashMap::new();
    for (w, &f) in degrees.iter().enumerate() {
        displaced.clear();
        let mut sources = Vec::with_capacity(f as usize);
        for i in 0..f {
            let j = rng.random_range(i..alive_count);
            let pick = *displaced.get(&j).unwrap_or(&j);
            let shadowed = *displaced.get(&i).unwrap_or(&i);
            displaced.insert(j, shadowed);
            let v = alive_ids[pick as usize];
            sources.push(v);
            out_adj[v as usize].push(w as u32);
        }
        in_adj.push(sources);
    }
    for list in &mut out_adj {
        list.shuffle(rng);
    }
    BipartiteGraph {
        n_v,
        n_w: degrees.len() as u32,
        out_adj,
        in_adj,
        alive,
        alive_count,
        source_seed: seed,
        external_ids: None,
    }
}

/// Write `graph` as whitespace `src dst` lines under a
/// `#bipartite N M seed` header.
pub fn save_edge_list(graph: &BipartiteGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(
            out,
            "#bipartite {} {} {}",
            graph.n_v,
            graph.n_w,
            graph.source_seed.unwrap_or(0)
        )?;
        for v in 0..graph.n_v {
            for &w in graph.out_neighbors(v) {
                writeln!(out, "{v} {w}")?;
            }
        }
        out.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Read an edge list of whitespace `src dst` pairs; `#` lines are comments
/// and duplicate edges collapse. Without a `#bipartite` header the file is a
/// directed graph: IDs are densified to `0..N-1` in first-seen order (the
/// original IDs stay available via [`BipartiteGraph::external_id`]) and the
/// W side aliases the V side. With the header, IDs are taken as already
/// dense against the declared side sizes.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut header: Option<(u32, u32, u64)> = None;
    let mut edges: Vec<(u64, u64)> = Vec::new();
    let mut seen_edge_line = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            if !seen_edge_line && header.is_none() {
                if let Some(spec) = rest.trim().strip_prefix("bipartite") {
                    header = parse_bipartite_header(path, line_no, spec)?;
                }
            }
            continue;
        }
        seen_edge_line = true;
        let mut fields = text.split_whitespace();
        let src = parse_id(path, line_no, fields.next())?;
        let dst = parse_id(path, line_no, fields.next())?;
        if fields.next().is_some() {
            return Err(Error::MalformedLine {
                path: path.into(),
                line: line_no,
                reason: "expected exactly two fields".into(),
            });
        }
        if let Some((n_v, n_w, _)) = header {
            if src >= n_v as u64 || dst >= n_w as u64 {
                return Err(Error::MalformedLine {
                    path: path.into(),
                    line: line_no,
                    reason: format!("edge ({src}, {dst}) outside declared sides {n_v} x {n_w}"),
                });
            }
        }
        edges.push((src, dst));
    }

    let (n_v, n_w, seed, external_ids, dense_edges) = match header {
        Some((n_v, n_w, seed)) => {
            let dense = edges
                .iter()
                .map(|&(s, d)| (s as u32, d as u32))
                .collect::<Vec<_>>();
            (n_v, n_w, Some(seed), None, dense)
        }
        None => {
            let mut ids: Vec<u64> = Vec::new();
            let mut dense_of: HashMap<u64, u32> = HashMap::new();
            let mut densify = |raw: u64| -> u32 {
                *dense_of.entry(raw).or_insert_with(|| {
                    ids.push(raw);
                    (ids.len() - 1) as u32
                })
            };
            let dense = edges
                .iter()
                .map(|&(s, d)| (densify(s), densify(d)))
                .collect::<Vec<_>>();
            let n = ids.len() as u32;
            (n, n, None, Some(ids), dense)
        }
    };

    let mut seen = HashSet::with_capacity(dense_edges.len());
    let mut out_adj = vec![Vec::new(); n_v as usize];
    let mut in_adj = vec![Vec::new(); n_w as usize];
    for (s, d) in dense_edges {
        if seen.insert((s, d)) {
            out_adj[s as usize].push(d);
            in_adj[d as usize].push(s);
        }
    }
    let alive_count = n_v;
    Ok(BipartiteGraph {
        n_v,
        n_w,
        out_adj,
        in_adj,
        alive: vec![true; n_v as usize],
        alive_count,
        source_seed: seed,
        external_ids,
    })
}

fn parse_bipartite_header(
    path: &Path,
    line_no: usize,
    spec: &str,
) -> Result<Option<(u32, u32, u64)>> {
    let parts: Vec<&str> = spec.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::MalformedLine {
            path: path.into(),
            line: line_no,
            reason: "bipartite header needs `N M seed`".into(),
        });
    }
    let bad = |what: &str| Error::MalformedLine {
        path: path.into(),
        line: line_no,
        reason: format!("bipartite header: bad {what}"),
    };
    let n_v: u32 = parts[0].parse().map_err(|_| bad("N"))?;
    let n_w: u32 = parts[1].parse().map_err(|_| bad("M"))?;
    let seed: u64 = parts[2].parse().map_err(|_| bad("seed"))?;
    Ok(Some((n_v, n_w, seed)))
}

fn parse_id(path: &Path, line_no: usize, field: Option<&str>) -> Result<u64> {
    let field = field.ok_or_else(|| Error::MalformedLine {
        path: path.into(),
        line: line_no,
        reason: "expected exactly two fields".into(),
    })?;
    field.parse().map_err(|_| Error::MalformedLine {
        path: path.into(),
        line: line_no,
        reason: format!("not an integer ID: {field:?}"),
    })
}

/// True top list: W-IDs ranked by in-degree, ties by ascending ID.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    ranked_ids: Vec<u32>,
    order_stats: Vec<u32>,
    total_entities: u32,
    degrees: HashMap<u32, u32>,
}

impl GroundTruth {
    pub fn ranked_ids(&self) -> &[u32] {
        &self.ranked_ids
    }

    /// Non-increasing degree sequence aligned with `ranked_ids`.
    pub fn order_stats(&self) -> &[u32] {
        &self.order_stats
    }

    pub fn len(&self) -> usize {
        self.ranked_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked_ids.is_empty()
    }

    pub fn total_entities(&self) -> u32 {
        self.total_entities
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.total_entities as usize
    }

    /// Degree of `id` if it is covered by this ranking prefix.
    pub fn degree_of(&self, id: u32) -> Option<u32> {
        self.degrees.get(&id).copied()
    }

    /// 1-based order statistic `F_rank`.
    pub fn stat(&self, rank: usize) -> u32 {
        self.order_stats[rank - 1]
    }
}

/// Rank the W side exactly and keep the first `k` entries.
pub fn ground_truth(graph: &BipartiteGraph, k: usize) -> Result<GroundTruth> {
    if k == 0 || k > graph.n_w as usize {
        return Err(Error::OutOfRange(format!(
            "k = {k} outside 1..={}",
            graph.n_w
        )));
    }
    let mut ids: Vec<u32> = (0..graph.n_w).collect();
    ids.sort_unstable_by_key(|&w| (std::cmp::Reverse(graph.in_degree(w)), w));
    ids.truncate(k);
    let order_stats: Vec<u32> = ids.iter().map(|&w| graph.in_degree(w)).collect();
    let degrees = ids
        .iter()
        .map(|&w| (w, graph.in_degree(w)))
        .collect::<HashMap<_, _>>();
    Ok(GroundTruth {
        ranked_ids: ids,
        order_stats,
        total_entities: graph.n_w,
        degrees,
    })
}
