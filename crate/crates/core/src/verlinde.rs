//! Pants decompositions, glued moment polytopes, and level-k lattice counts.
//!
//! A decomposition is a trivalent multigraph: vertices are trinions, internal
//! edges are cut circles (loops and multi-edges allowed), legs are punctures.
//! An integer labeling at level `k` is admissible when every vertex with labels
//! `(a, b, c)` satisfies `|a-b| ≤ c ≤ a+b`, `a+b+c ≤ 2k`, `a+b+c` even.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Edge(usize),
    Leg(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Edge(e) => write!(f, "e{e}"),
            Slot::Leg(l) => write!(f, "l{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionGraph {
    vertices: Vec<[Slot; 3]>,
    num_edges: usize,
    num_legs: usize,
}

impl DecompositionGraph {
    /// Validates that every edge has exactly two ends and every leg one.
    pub fn new(vertices: Vec<[Slot; 3]>) -> Result<DecompositionGraph> {
        let mut edge_ends: HashMap<usize, usize> = HashMap::new();
        let mut legs: HashMap<usize, usize> = HashMap::new();
        for s in vertices.iter().flatten() {
            match *s {
                Slot::Edge(e) => *edge_ends.entry(e).or_default() += 1,
                Slot::Leg(l) => *legs.entry(l).or_default() += 1,
            }
        }
        let num_edges = edge_ends.len();
        let num_legs = legs.len();
        for e in 0..num_edges {
            match edge_ends.get(&e) {
                Some(2) => {}
                Some(c) => {
                    return Err(Error::InvalidSignature(format!("edge e{e} has {c} ends")));
                }
                None => return Err(Error::InvalidSignature(format!("edge ids skip e{e}"))),
            }
        }
        for l in 0..num_legs {
            match legs.get(&l) {
                Some(1) => {}
                Some(c) => return Err(Error::InvalidSignature(format!("leg l{l} appears {c} times"))),
                None => return Err(Error::InvalidSignature(format!("leg ids skip l{l}"))),
            }
        }
        Ok(DecompositionGraph { vertices, num_edges, num_legs })
    }

    pub fn vertices(&self) -> &[[Slot; 3]] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_legs(&self) -> usize {
        self.num_legs
    }

    /// Vertices incident to each edge (equal for loops).
    pub fn edge_endpoints(&self) -> Vec<(usize, usize)> {
        let mut ends: Vec<Vec<usize>> = vec![Vec::new(); self.num_edges];
        for (v, slots) in self.vertices.iter().enumerate() {
            for s in slots {
                if let Slot::Edge(e) = s {
                    ends[*e].push(v);
                }
            }
        }
        ends.into_iter().map(|e| (e[0], e[1])).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let ends = self.edge_endpoints();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for s in &self.vertices[v] {
                if let Slot::Edge(e) = s {
                    let (a, b) = ends[*e];
                    let w = if a == v { b } else { a };
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    /// First Betti number of a connected graph, i.e. the surface genus.
    pub fn genus(&self) -> usize {
        (self.num_edges + 1).saturating_sub(self.vertices.len())
    }

    pub fn loop_count(&self) -> usize {
        self.edge_endpoints().iter().filter(|(a, b)| a == b).count()
    }

    /// One line per vertex listing its incident edges (`e<i>`) and legs (`l<i>`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for slots in &self.vertices {
            out.push_str(&format!("{} {} {}\n", slots[0], slots[1], slots[2]));
        }
        out
    }
}

impl FromStr for DecompositionGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<DecompositionGraph> {
        let parse_slot = |tok: &str| -> Result<Slot> {
            let bad = || Error::Parse(format!("bad slot identifier {tok:?}"));
            let (kind, rest) = tok.split_at(1);
            let id: usize = rest.parse().map_err(|_| bad())?;
            match kind {
                "e" => Ok(Slot::Edge(id)),
                "l" => Ok(Slot::Leg(id)),
                _ => Err(bad()),
            }
        };
        let mut vertices = Vec::new();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse(format!("vertex line needs 3 slots: {line:?}")));
            }
            vertices.push([parse_slot(toks[0])?, parse_slot(toks[1])?, parse_slot(toks[2])?]);
        }
        DecompositionGraph::new(vertices)
    }
}

fn check_signature(g: usize, n: usize) -> Result<()> {
    if 2 * g + n < 3 {
        return Err(Error::InvalidSignature(format!(
            "genus {g} with {n} punctures has no pants decomposition"
        )));
    }
    Ok(())
}

/// Caterpillar decomposition: a path of trinions carrying the punctures and,
/// on pendant edges, one loop vertex per handle. `(2, 0)` is the theta graph.
pub fn standard_decomposition(g: usize, n: usize) -> Result<DecompositionGraph> {
    check_signature(g, n)?;
    use Slot::{Edge, Leg};
    if (g, n) == (2, 0) {
        return DecompositionGraph::new(vec![[Edge(0), Edge(1), Edge(2)]; 2]);
    }
    if (g, n) == (1, 1) {
        return DecompositionGraph::new(vec![[Edge(0), Edge(0), Leg(0)]]);
    }
    let m = g + n;
    let spine = m - 2;
    let mut vertices: Vec<[Slot; 3]> = Vec::new();
    let mut next_edge = 0;
    let mut fresh = || {
        next_edge += 1;
        next_edge - 1
    };
    let spine_edges: Vec<usize> = (0..spine.saturating_sub(1)).map(|_| fresh()).collect();
    let mut loops = Vec::new();
    let mut leaf = |i: usize, fresh: &mut dyn FnMut() -> usize| -> Slot {
        if i < g {
            let stem = fresh();
            let lp = fresh();
            loops.push([Edge(stem), Edge(lp), Edge(lp)]);
            Edge(stem)
        } else {
            Leg(i - g)
        }
    };
    for u in 0..spine {
        let slots = if spine == 1 {
            [leaf(0, &mut fresh), leaf(1, &mut fresh), leaf(2, &mut fresh)]
        } else if u == 0 {
            [leaf(0, &mut fresh), leaf(1, &mut fresh), Edge(spine_edges[0])]
        } else if u == spine - 1 {
            [Edge(spine_edges[u - 1]), leaf(m - 2, &mut fresh), leaf(m - 1, &mut fresh)]
        } else {
            [Edge(spine_edges[u - 1]), leaf(u + 1, &mut fresh), Edge(spine_edges[u])]
        };
        vertices.push(slots);
    }
    vertices.extend(loops);
    DecompositionGraph::new(vertices)
}

/// Uniformly paired random connected trivalent graph with `n` legs.
pub fn random_decomposition(g: usize, n: usize, seed: u64) -> Result<DecompositionGraph> {
    check_signature(g, n)?;
    let nv = 2 * g + n - 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut half: Vec<usize> = (0..3 * nv).collect();
        half.shuffle(&mut rng);
        let mut slots = vec![Slot::Leg(0); 3 * nv];
        for (l, &h) in half[..n].iter().enumerate() {
            slots[h] = Slot::Leg(l);
        }
        for (e, pair) in half[n..].chunks(2).enumerate() {
            slots[pair[0]] = Slot::Edge(e);
            slots[pair[1]] = Slot::Edge(e);
        }
        let vertices = slots.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let graph = DecompositionGraph::new(vertices)?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub coeffs: Vec<Rational64>,
    pub rhs: Rational64,
}

/// `{x : a·x ≤ b for every row}` over one variable per internal edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPolytope {
    pub variables: Vec<String>,
    pub rows: Vec<Inequality>,
}

impl HPolytope {
    pub fn contains(&self, x: &[Rational64]) -> bool {
        self.rows.iter().all(|r| {
            let lhs: Rational64 = r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            lhs <= r.rhs
        })
    }

    /// One inequality per line: `a1 a2 … an <= b`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# variables: {}\n", self.variables.join(" "));
        for r in &self.rows {
            let mut toks: Vec<String> = r.coeffs.iter().map(|c| c.to_string()).collect();
            toks.push("<=".into());
            toks.push(r.rhs.to_string());
            out.push_str(&toks.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.35` exactly.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let mag = int.abs() * den + num;
        return Ok(Rational64::new(if neg { -mag } else { mag }, den));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

/// The glued moment polytope with legs fixed to `legs` (values in `[0,1]`).
pub fn moment_polytope(graph: &DecompositionGraph, legs: &[Rational64]) -> Result<HPolytope> {
    if legs.len() != graph.num_legs() {
        return Err(Error::InvalidSignature(format!(
            "graph has {} legs, {} values given",
            graph.num_legs(),
            legs.len()
        )));
    }
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    if legs.iter().any(|&l| l < zero || l > one) {
        return Err(Error::LevelOutOfRange("leg values must lie in [0,1]".into()));
    }
    let nvar = graph.num_edges();
    let mut rows = Vec::new();
    // linear form of a slot: (coefficients, constant)
    let form = |s: Slot| -> (Vec<Rational64>, Rational64) {
        let mut c = vec![zero; nvar];
        match s {
            Slot::Edge(e) => {
                c[e] = one;
                (c, zero)
            }
            Slot::Leg(l) => (c, legs[l]),
        }
    };
    let combine = |terms: &[(Rational64, Slot)]| -> (Vec<Rational64>, Rational64) {
        let mut c = vec![zero; nvar];
        let mut k = zero;
        for &(w, s) in terms {
            let (fc, fk) = form(s);
            for (ci, fi) in c.iter_mut().zip(fc) {
                *ci += w * fi;
            }
            k += w * fk;
        }
        (c, k)
    };
    let two = Rational64::from_integer(2);
    for slots in graph.vertices() {
        let [a, b, c] = *slots;
        let m1 = -one;
        // sum ≤ 2, then x_a ≤ x_b + x_c and cyclic
        for terms in [
            [(one, a), (one, b), (one, c)],
            [(one, a), (m1, b), (m1, c)],
            [(m1, a), (one, b), (m1, c)],
            [(m1, a), (m1, b), (one, c)],
        ] {
            let (coeffs, k) = combine(&terms);
            let bound = if terms[0].0 == one && terms[1].0 == one { two } else { zero };
            rows.push(Inequality { coeffs, rhs: bound - k });
        }
    }
    for e in 0..nvar {
        let mut lo = vec![zero; nvar];
        lo[e] = -one;
        rows.push(Inequality { coeffs: lo, rhs: zero });
        let mut hi = vec![zero; nvar];
        hi[e] = one;
        rows.push(Inequality { coeffs: hi, rhs: one });
    }
    Ok(HPolytope { variables: (0..nvar).map(|e| format!("e{e}")).collect(), rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Bruteforce,
    Dp,
}

impl FromStr for CountMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<CountMethod> {
        match s {
            "bruteforce" | "brute" => Ok(CountMethod::Bruteforce),
            "dp" => Ok(CountMethod::Dp),
            _ => Err(Error::Parse(format!("unknown counting method {s:?}"))),
        }
    }
}

/// Quantum Clebsch–Gordan condition at level `k`.
#[inline]
pub fn admissible(a: u32, b: u32, c: u32, k: u32) -> bool {
    let s = a + b + c;
    s % 2 == 0 && s <= 2 * k && a.abs_diff(b) <= c && c <= a + b
}

fn check_labels(graph: &DecompositionGraph, k: u32, legs: &[u32]) -> Result<()> {
    if k == 0 {
        return Err(Error::LevelOutOfRange("level must be at least 1".into()));
    }
    if legs.len() != graph.num_legs() {
        return Err(Error::LevelOutOfRange(format!(
            "graph has {} legs, {} labels given",
            graph.num_legs(),
            legs.len()
        )));
    }
    if let Some(l) = legs.iter().find(|&&l| l > k) {
        return Err(Error::LevelOutOfRange(format!("leg label {l} exceeds level {k}")));
    }
    Ok(())
}

/// Number of admissible labelings of the internal edges at level `k`.
///
/// `threads` only affects the DP; `None` uses the global rayon pool.
pub fn count_lattice_points(
    graph: &DecompositionGraph,
    k: u32,
    legs: &[u32],
    method: CountMethod,
    threads: Option<usize>,
) -> Result<u128> {
    check_labels(graph, k, legs)?;
    match method {
        CountMethod::Bruteforce => Ok(count_bruteforce(graph, k, legs)),
        CountMethod::Dp => match threads {
            None => Ok(count_dp(graph, k, legs)),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                Ok(pool.install(|| count_dp(graph, k, legs)))
            }
        },
    }
}

fn slot_value(s: Slot, edges: &[u32], legs: &[u32]) -> u32 {
    match s {
        Slot::Edge(e) => edges[e],
        Slot::Leg(l) => legs[l],
    }
}

fn count_bruteforce(graph: &DecompositionGraph, k: u32, legs: &[u32]) -> u128 {
    let ne = graph.num_edges();
    let mut labels = vec![0u32; ne];
    let mut count = 0u128;
    loop {
        let ok = graph.vertices().iter().all(|s| {
            admissible(
                slot_value(s[0], &labels, legs),
                slot_value(s[1], &labels, legs),
                slot_value(s[2], &labels, legs),
                k,
            )
        });
        if ok {
            count += 1;
        }
        // odometer
        let mut i = 0;
        loop {
            if i == ne {
                return count;
            }
            labels[i] += 1;
            if labels[i] <= k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Vertex elimination order minimizing the frontier greedily.
pub fn elimination_order(graph: &DecompositionGraph) -> Vec<usize> {
    let ends = graph.edge_endpoints();
    let nv = graph.num_vertices();
    let mut done = vec![false; nv];
    let mut frontier: HashSet<usize> = HashSet::new();
    let mut order = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut best: Option<(usize, usize, usize)> = None; // (size, opened, vertex)
        for v in (0..nv).filter(|&v| !done[v]) {
            let (next, _) = frontier_after(graph, &ends, &frontier, &done, v);
            let touches = graph.vertices()[v]
                .iter()
                .filter(|s| matches!(s, Slot::Edge(e) if frontier.contains(e)))
                .count();
            let key = (next.len(), usize::MAX - touches, v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let v = best.expect("unprocessed vertex").2;
        frontier = frontier_after(graph, &ends, &frontier, &done, v).0;
        done[v] = true;
        order.push(v);
    }
    order
}

/// Frontier after processing `v`, and the edges newly labeled at `v`.
fn frontier_after(
    graph: &DecompositionGraph,
    ends: &[(usize, usize)],
    frontier: &HashSet<usize>,
    done: &[bool],
    v: usize,
) -> (HashSet<usize>, Vec<usize>) {
    let mut next = frontier.clone();
    let mut fresh = Vec::new();
    for s in &graph.vertices()[v] {
        if let Slot::Edge(e) = *s {
            if frontier.contains(&e) {
                next.remove(&e);
            } else if !fresh.contains(&e) {
                fresh.push(e);
                let (a, b) = ends[e];
                let other = if a == v { b } else { a };
                if other != v && !done[other] {
                    next.insert(e);
                }
            }
        }
    }
    (next, fresh)
}

/// Transfer-tensor contraction along the elimination order; the state maps
/// labels of the open frontier edges to the number of partial labelings.
fn count_dp(graph: &DecompositionGraph, k: u32, legs: &[u32]) -> u128 {
    let ends = graph.edge_endpoints();
    let order = elimination_order(graph);
    let mut done = vec![false; graph.num_vertices()];
    let mut frontier: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u32>, u128> = HashMap::from([(Vec::new(), 1u128)]);

    for &v in &order {
        let fset: HashSet<usize> = frontier.iter().copied().collect();
        let (next_set, fresh) = frontier_after(graph, &ends, &fset, &done, v);
        // deterministic layout of the new frontier: surviving old edges, then fresh ones
        let mut next: Vec<usize> = frontier.iter().copied().filter(|e| next_set.contains(e)).collect();
        next.extend(fresh.iter().copied().filter(|e| next_set.contains(e)));
        let pos_old: HashMap<usize, usize> = frontier.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let slots = graph.vertices()[v];
        let combos = (k as usize + 1).pow(fresh.len() as u32);

        let step = |(key, count): (&Vec<u32>, &u128)| -> Vec<(Vec<u32>, u128)> {
            let mut out = Vec::new();
            let mut fresh_vals = vec![0u32; fresh.len()];
            for mut idx in 0..combos {
                for val in fresh_vals.iter_mut() {
                    *val = (idx % (k as usize + 1)) as u32;
                    idx /= k as usize + 1;
                }
                let value = |s: Slot| -> u32 {
                    match s {
                        Slot::Leg(l) => legs[l],
                        Slot::Edge(e) => match pos_old.get(&e) {
                            Some(&i) => key[i],
                            None => fresh_vals[fresh.iter().position(|&f| f == e).expect("fresh")],
                        },
                    }
                };
                if !admissible(value(slots[0]), value(slots[1]), value(slots[2]), k) {
                    continue;
                }
                let new_key: Vec<u32> = next.iter().map(|&e| value(Slot::Edge(e))).collect();
                out.push((new_key, *count));
            }
            out
        };
        let entries: Vec<(&Vec<u32>, &u128)> = states.iter().collect();
        states = entries
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<u32>, u128>, &(key, count)| {
                for (nk, c) in step((key, count)) {
                    *acc.entry(nk).or_default() += c;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (nk, c) in b {
                    *a.entry(nk).or_default() += c;
                }
                a
            });
        done[v] = true;
        frontier = next;
    }
    states.get(&Vec::new()).copied().unwrap_or(0)
}

/// Neumaier-compensated sum.
fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The SU(2) level-`k` Verlinde number, with the rounding residue of the
/// trigonometric sum. Residues above `1e-6` are errors.
pub fn verlinde_closed_form(g: usize, k: u32, legs: &[u32]) -> Result<(u128, f64)> {
    check_signature(g, legs.len())?;
    if k == 0 {
        return Err(Error::LevelOutOfRange("level must be at least 1".into()));
    }
    if let Some(l) = legs.iter().find(|&&l| l > k) {
        return Err(Error::LevelOutOfRange(format!("leg label {l} exceeds level {k}")));
    }
    let kk = k as f64 + 2.0;
    let prefactor = (kk / 2.0).powi(g as i32 - 1);
    let terms = (1..=k + 1).map(|j| {
        let s = (j as f64 * PI / kk).sin();
        let legs_factor: f64 =
            legs.iter().map(|&l| ((l as f64 + 1.0) * j as f64 * PI / kk).sin() / s).product();
        prefactor * s.powi(2 - 2 * g as i32) * legs_factor
    });
    let value = compensated_sum(terms);
    let rounded = value.round();
    let residue = (value - rounded).abs();
    if residue > 1e-6 || rounded < 0.0 {
        return Err(Error::RoundingResidue(residue));
    }
    Ok((rounded as u128, residue))
}
