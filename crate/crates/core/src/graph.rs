//! Mixed graphs with directed and bidirected edges, the m-separation
//! criterion, ancestrality / maximality checks, Markov-equivalence testing,
//! and builders for the standard two-block latent model family.
//!
//! A non-endpoint vertex on a path is a collider when two arrowheads meet at
//! it. A path m-connects two vertices given a conditioning set Z when no
//! non-collider on it is in Z and every collider on it is an ancestor of
//! some member of Z. Vertex sets A and B are m-separated given Z when no
//! pair is joined by an m-connecting path. The production query runs a
//! reachability search over (vertex, arrival-mark) states, relying on the
//! equivalence of m-connecting walks and paths.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Cap on exhaustive enumeration (implied separations, equivalence checks).
pub const MAX_ENUMERATION_VERTICES: usize = 16;

/// A labeled mixed graph: directed edges `tail -> head` and bidirected
/// edges `x <-> y`, at most one edge per vertex pair, no self loops.
#[derive(Debug, Clone)]
pub struct MixedGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    directed: BTreeSet<(usize, usize)>,
    bidirected: BTreeSet<(usize, usize)>,
    latent: BTreeSet<usize>,
}

impl MixedGraph {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(l.clone()));
            }
        }
        Ok(MixedGraph {
            labels,
            index,
            directed: BTreeSet::new(),
            bidirected: BTreeSet::new(),
            latent: BTreeSet::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.directed.iter().map(|&(t, h)| (self.labels[t].as_str(), self.labels[h].as_str()))
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bidirected.iter().map(|&(x, y)| (self.labels[x].as_str(), self.labels[y].as_str()))
    }

    pub fn latent_labels(&self) -> impl Iterator<Item = &str> {
        self.latent.iter().map(|&i| self.labels[i].as_str())
    }

    pub fn is_latent(&self, label: &str) -> bool {
        self.vertex(label).map(|i| self.latent.contains(&i)).unwrap_or(false)
    }

    fn pair_is_joined(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b))
            || self.directed.contains(&(b, a))
            || self.bidirected.contains(&(a.min(b), a.max(b)))
    }

    fn check_new_edge(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(self.labels[a].clone()));
        }
        if self.pair_is_joined(a, b) {
            return Err(Error::DuplicateEdge(self.labels[a].clone(), self.labels[b].clone()));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, tail: &str, head: &str) -> Result<()> {
        let t = self.vertex(tail)?;
        let h = self.vertex(head)?;
        self.check_new_edge(t, h)?;
        self.directed.insert((t, h));
        Ok(())
    }

    pub fn add_bidirected(&mut self, x: &str, y: &str) -> Result<()> {
        let a = self.vertex(x)?;
        let b = self.vertex(y)?;
        self.check_new_edge(a, b)?;
        self.bidirected.insert((a.min(b), a.max(b)));
        Ok(())
    }

    /// Display-only marker; m-separation itself is flag-agnostic.
    pub fn mark_latent(&mut self, label: &str) -> Result<()> {
        let v = self.vertex(label)?;
        self.latent.insert(v);
        Ok(())
    }

    pub fn adjacent(&self, x: &str, y: &str) -> Result<bool> {
        let a = self.vertex(x)?;
        let b = self.vertex(y)?;
        Ok(self.pair_is_joined(a, b))
    }

    /// Mask of vertices that are ancestors of (or members of) the seed set,
    /// following directed edges backwards. Ancestry is reflexive.
    fn ancestor_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let n = self.vertex_count();
        let mut parents = vec![Vec::new(); n];
        for &(t, h) in &self.directed {
            parents[h].push(t);
        }
        let mut mask = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !mask[s] {
                mask[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &p in &parents[v] {
                if !mask[p] {
                    mask[p] = true;
                    queue.push_back(p);
                }
            }
        }
        mask
    }

    /// Ancestors of a vertex (including the vertex itself).
    pub fn ancestors(&self, label: &str) -> Result<BTreeSet<String>> {
        let v = self.vertex(label)?;
        let mask = self.ancestor_mask(&[v]);
        Ok(mask
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m)
            .map(|(i, _)| self.labels[i].clone())
            .collect())
    }

    /// True iff the graph has no directed cycle and no bidirected edge
    /// joining a vertex to one of its ancestors.
    pub fn is_ancestral(&self) -> bool {
        let n = self.vertex_count();
        let mut children = vec![Vec::new(); n];
        for &(t, h) in &self.directed {
            children[t].push(h);
        }
        // Cycle check: can v reach itself through at least one directed edge?
        for v in 0..n {
            let mut stack: Vec<usize> = children[v].clone();
            let mut seen = vec![false; n];
            while let Some(w) = stack.pop() {
                if w == v {
                    return false;
                }
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                stack.extend(children[w].iter().copied());
            }
        }
        for &(x, y) in &self.bidirected {
            let anc_x = self.ancestor_mask(&[x]);
            if anc_x[y] {
                return false;
            }
            let anc_y = self.ancestor_mask(&[y]);
            if anc_y[x] {
                return false;
            }
        }
        true
    }

    /// Incidence list: (neighbor, arrowhead at self, arrowhead at neighbor).
    fn incidence(&self) -> Vec<Vec<(usize, bool, bool)>> {
        let n = self.vertex_count();
        let mut inc = vec![Vec::new(); n];
        for &(t, h) in &self.directed {
            inc[t].push((h, false, true));
            inc[h].push((t, true, false));
        }
        for &(x, y) in &self.bidirected {
            inc[x].push((y, true, true));
            inc[y].push((x, true, true));
        }
        inc
    }

    fn resolve_set(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.vertex(l)).collect()
    }

    /// m-separation of sets A and B given Z.
    pub fn m_separated(&self, query: &SeparationQuery) -> Result<bool> {
        let a = self.resolve_set(&query.a)?;
        let b = self.resolve_set(&query.b)?;
        let z = self.resolve_set(&query.z)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let mut seen = BTreeSet::new();
        for v in a.iter().chain(&b).chain(&z) {
            if !seen.insert(*v) {
                return Err(Error::NonDisjointSets(self.labels[*v].clone()));
            }
        }
        Ok(!self.m_connected_indices(&a, &b, &z))
    }

    /// Reachability over (vertex, arrived-with-arrowhead) states. A state
    /// transition through an intermediate vertex v is allowed when v is a
    /// collider that is an ancestor of Z, or a non-collider outside Z.
    fn m_connected_indices(&self, a: &[usize], b: &[usize], z: &[usize]) -> bool {
        let n = self.vertex_count();
        let inc = self.incidence();
        let anc_z = self.ancestor_mask(z);
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let mut in_b = vec![false; n];
        for &v in b {
            in_b[v] = true;
        }
        if a.iter().any(|&v| in_b[v]) {
            return true;
        }

        // visited[(v, arrived_head)]
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, bool)> = VecDeque::new();

        // Path starts are unconstrained at their first vertex.
        for &s in a {
            for &(w, _at_s, at_w) in &inc[s] {
                if !visited[w][at_w as usize] {
                    visited[w][at_w as usize] = true;
                    queue.push_back((w, at_w));
                }
            }
        }

        while let Some((v, arrived_head)) = queue.pop_front() {
            if in_b[v] {
                return true;
            }
            for &(w, at_v, at_w) in &inc[v] {
                let collider = arrived_head && at_v;
                let passable = if collider { anc_z[v] } else { !in_z[v] };
                if passable && !visited[w][at_w as usize] {
                    visited[w][at_w as usize] = true;
                    queue.push_back((w, at_w));
                }
            }
        }
        false
    }

    /// Maximality: every non-adjacent pair admits some separating set.
    /// Exhaustive over all subsets of the remaining vertices, so the same
    /// enumeration cap applies as for `implied_separations`.
    pub fn is_maximal(&self) -> Result<bool> {
        if !self.is_ancestral() {
            return Err(Error::NotAncestral);
        }
        let n = self.vertex_count();
        if n > MAX_ENUMERATION_VERTICES {
            return Err(Error::GraphTooLarge { n, max: MAX_ENUMERATION_VERTICES });
        }
        for x in 0..n {
            for y in (x + 1)..n {
                if self.pair_is_joined(x, y) {
                    continue;
                }
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                let mut separated = false;
                for mask in 0u32..(1u32 << rest.len()) {
                    let z: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| mask & (1 << k) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    if !self.m_connected_indices(&[x], &[y], &z) {
                        separated = true;
                        break;
                    }
                }
                if !separated {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All m-separation statements `(a, b, z)` over vertex pairs and every
    /// conditioning subset, in canonical order (pairs by vertex index, z by
    /// size then numeric mask). Set-level separation reduces to these.
    pub fn implied_separations(&self) -> Result<Vec<Separation>> {
        let n = self.vertex_count();
        if n > MAX_ENUMERATION_VERTICES {
            return Err(Error::GraphTooLarge { n, max: MAX_ENUMERATION_VERTICES });
        }
        let mut out = Vec::new();
        for x in 0..n {
            for y in (x + 1)..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in subset_masks(rest.len()) {
                    let z: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| mask & (1 << k) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    if !self.m_connected_indices(&[x], &[y], &z) {
                        out.push(Separation {
                            a: self.labels[x].clone(),
                            b: self.labels[y].clone(),
                            z: z.iter().map(|&v| self.labels[v].clone()).collect(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Copy of the graph with one vertex renamed.
    pub fn renamed(&self, from: &str, to: &str) -> Result<MixedGraph> {
        let v = self.vertex(from)?;
        if self.index.contains_key(to) {
            return Err(Error::DuplicateVertex(to.to_string()));
        }
        let mut g = self.clone();
        g.labels[v] = to.to_string();
        g.index.remove(from);
        g.index.insert(to.to_string(), v);
        Ok(g)
    }
}

/// Subset masks of {0..k}, ordered by size then numeric value.
fn subset_masks(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// An m-separation query: is A m-separated from B given Z?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub z: Vec<String>,
}

impl SeparationQuery {
    pub fn new<S: Into<String>>(a: Vec<S>, b: Vec<S>, z: Vec<S>) -> Self {
        SeparationQuery {
            a: a.into_iter().map(Into::into).collect(),
            b: b.into_iter().map(Into::into).collect(),
            z: z.into_iter().map(Into::into).collect(),
        }
    }
}

impl FromStr for SeparationQuery {
    type Err = Error;

    /// Parse `"A1,A2 | B1 | Z1,Z2"`; the empty set is an empty segment.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::BadQuery(format!(
                "expected three '|'-separated segments, got {}",
                parts.len()
            )));
        }
        let split = |seg: &str| -> Vec<String> {
            seg.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
        };
        Ok(SeparationQuery { a: split(parts[0]), b: split(parts[1]), z: split(parts[2]) })
    }
}

impl fmt::Display for SeparationQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} | {}", self.a.join(","), self.b.join(","), self.z.join(","))
    }
}

/// One m-separation statement: `a` and `b` are m-separated given `z`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Separation {
    pub a: String,
    pub b: String,
    pub z: Vec<String>,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} _||_ {} | {{{}}}", self.a, self.b, self.z.join(","))
    }
}

/// Rename a vertex throughout a list of separation statements.
pub fn rename_in_separations(seps: &[Separation], from: &str, to: &str) -> Vec<Separation> {
    let sub = |s: &String| if s == from { to.to_string() } else { s.clone() };
    seps.iter()
        .map(|sep| Separation {
            a: sub(&sep.a),
            b: sub(&sep.b),
            z: sep.z.iter().map(sub).collect(),
        })
        .collect()
}

/// Result of a Markov-equivalence comparison. On inequivalence, `witness`
/// is the first statement (in canonical query order) holding in exactly one
/// of the graphs.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub witness: Option<Separation>,
}

/// Two graphs over the same vertex set are Markov equivalent when they imply
/// identical m-separation statements.
pub fn markov_equivalent(g1: &MixedGraph, g2: &MixedGraph) -> Result<EquivalenceReport> {
    let mut l1: Vec<&String> = g1.labels.iter().collect();
    let mut l2: Vec<&String> = g2.labels.iter().collect();
    l1.sort();
    l2.sort();
    if l1 != l2 {
        return Err(Error::VertexSetMismatch);
    }
    let n = g1.vertex_count();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(Error::GraphTooLarge { n, max: MAX_ENUMERATION_VERTICES });
    }

    for x in 0..n {
        for y in (x + 1)..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
            for mask in subset_masks(rest.len()) {
                let z: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                let sep1 = !g1.m_connected_indices(&[x], &[y], &z);

                let x2 = g2.vertex(&g1.labels[x])?;
                let y2 = g2.vertex(&g1.labels[y])?;
                let z2: Vec<usize> =
                    z.iter().map(|&v| g2.vertex(&g1.labels[v])).collect::<Result<_>>()?;
                let sep2 = !g2.m_connected_indices(&[x2], &[y2], &z2);

                if sep1 != sep2 {
                    return Ok(EquivalenceReport {
                        equivalent: false,
                        witness: Some(Separation {
                            a: g1.labels[x].clone(),
                            b: g1.labels[y].clone(),
                            z: z.iter().map(|&v| g1.labels[v].clone()).collect(),
                        }),
                    });
                }
            }
        }
    }
    Ok(EquivalenceReport { equivalent: true, witness: None })
}

/// Variants of the two-block latent model family.
///
/// - `A`: latents xi <-> omega, each parenting its block.
/// - `B`: xi -> omega, each parenting its block.
/// - `C`: X's parent xi, xi -> omega, omega parents the Y's.
/// - `D`: a single latent eta parents both blocks.
/// - `E`: X's parent eta, eta parents the Y's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    A,
    B,
    C,
    D,
    E,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            "d" => Ok(Variant::D),
            "e" => Ok(Variant::E),
            other => Err(Error::BadInput(format!("unknown variant {other:?} (expected a-e)"))),
        }
    }
}

/// Error-structure condition: under `I` the within-block errors are freely
/// correlated (bidirected edges between all same-block pairs); under `II`
/// they are independent (no within-block edges).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    I,
    II,
}

impl FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Condition::I),
            "II" | "2" => Ok(Condition::II),
            other => {
                Err(Error::BadInput(format!("unknown condition {other:?} (expected I or II)")))
            }
        }
    }
}

/// Specification of one member of the two-block model family.
#[derive(Debug, Clone, Copy)]
pub struct FamilySpec {
    pub variant: Variant,
    pub condition: Condition,
    pub p: usize,
    pub q: usize,
}

/// Build the path diagram for a family member. Observed vertices are
/// labeled `X1..Xp`, `Y1..Yq`; latents are `xi`/`omega` (variants a-c) or
/// `eta` (variants d, e) and carry the latent display flag.
pub fn family_graph(spec: &FamilySpec) -> Result<MixedGraph> {
    if spec.p == 0 || spec.q == 0 {
        return Err(Error::BadInput("family graphs need p >= 1 and q >= 1".into()));
    }
    let xs: Vec<String> = (1..=spec.p).map(|i| format!("X{i}")).collect();
    let ys: Vec<String> = (1..=spec.q).map(|j| format!("Y{j}")).collect();
    let latents: Vec<&str> = match spec.variant {
        Variant::A | Variant::B | Variant::C => vec!["xi", "omega"],
        Variant::D | Variant::E => vec!["eta"],
    };

    let mut labels: Vec<String> = Vec::new();
    labels.extend(xs.iter().cloned());
    labels.extend(ys.iter().cloned());
    labels.extend(latents.iter().map(|s| s.to_string()));
    let mut g = MixedGraph::new(labels)?;
    for l in &latents {
        g.mark_latent(l)?;
    }

    match spec.variant {
        Variant::A => {
            g.add_bidirected("xi", "omega")?;
            for x in &xs {
                g.add_directed("xi", x)?;
            }
            for y in &ys {
                g.add_directed("omega", y)?;
            }
        }
        Variant::B => {
            g.add_directed("xi", "omega")?;
            for x in &xs {
                g.add_directed("xi", x)?;
            }
            for y in &ys {
                g.add_directed("omega", y)?;
            }
        }
        Variant::C => {
            for x in &xs {
                g.add_directed(x, "xi")?;
            }
            g.add_directed("xi", "omega")?;
            for y in &ys {
                g.add_directed("omega", y)?;
            }
        }
        Variant::D => {
            for x in &xs {
                g.add_directed("eta", x)?;
            }
            for y in &ys {
                g.add_directed("eta", y)?;
            }
        }
        Variant::E => {
            for x in &xs {
                g.add_directed(x, "eta")?;
            }
            for y in &ys {
                g.add_directed("eta", y)?;
            }
        }
    }

    if spec.condition == Condition::I {
        for i in 0..xs.len() {
            for k in (i + 1)..xs.len() {
                g.add_bidirected(&xs[i], &xs[k])?;
            }
        }
        for j in 0..ys.len() {
            for l in (j + 1)..ys.len() {
                g.add_bidirected(&ys[j], &ys[l])?;
            }
        }
    }
    Ok(g)
}
