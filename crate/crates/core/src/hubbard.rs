//! Combinatorial Hubbard trees built from the identification classes of the
//! postcritical orbit.
//!
//! Marked classes are the classes of `2^k θ` together with the critical class
//! (the preimage of the class of θ). Their convex hulls cut the disk into
//! regions; a region touched by two classes is an edge of the tree, and a
//! region touched by three or more classes hides one or more branch points.
//! The branch structure inside such a region is recovered from quartet
//! splits, which are invariant under the dynamics as long as the four classes
//! bound a common region (the map is injective on their hull). Pushing a
//! quartet forward either reaches a configuration separated by a marked
//! class, or cycles; a cycle forces a single branch point.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::circle::{orbit2, Angle};
use crate::entropy::{entropy_of, EntropyResult, Method, SpectralConfig, TransitionGraph};
use crate::error::{Error, Result};
use crate::itinerary::{orbit_classes, periodic_fiber, portrait, Symbol};
use crate::lamination::ComponentRoot;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MarkedClass {
    pub angles: Vec<Angle>,
}

impl MarkedClass {
    pub fn new(mut angles: Vec<Angle>) -> MarkedClass {
        angles.sort();
        angles.dedup();
        MarkedClass { angles }
    }

    pub fn min_angle(&self) -> &Angle {
        &self.angles[0]
    }

    pub fn contains(&self, x: &Angle) -> bool {
        self.angles.binary_search(x).is_ok()
    }
}

/// Postcritical classes of θ: `orbit_class[k]` is the class of `2^k θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Postcritical {
    pub classes: Vec<MarkedClass>,
    pub orbit_class: Vec<usize>,
    pub critical: usize,
}

/// Index of the gap of `c` (between consecutive members) containing `x`, or
/// `None` if `x` is a member.
fn gap_index(c: &[Angle], x: &Angle) -> Option<usize> {
    match c.binary_search(x) {
        Ok(_) => None,
        Err(pos) => Some(if pos == 0 { c.len() - 1 } else { pos - 1 }),
    }
}

/// Gap of `c` containing all of `a`; error if `a` meets several gaps.
fn gap_of_class(c: &[Angle], a: &[Angle]) -> Result<usize> {
    let mut gap = None;
    for x in a {
        let g = gap_index(c, x).ok_or_else(|| Error::Linked(format!("{x} lies in both classes")))?;
        match gap {
            None => gap = Some(g),
            Some(h) if h != g => {
                return Err(Error::Linked(format!(
                    "class {:?} meets several gaps of {:?}",
                    a, c
                )))
            }
            _ => {}
        }
    }
    gap.ok_or_else(|| Error::InvalidInput("empty class".into()))
}

/// True iff `a` and `b` lie in different gaps of `c`.
pub fn betweenness(a: &MarkedClass, c: &MarkedClass, b: &MarkedClass) -> Result<bool> {
    if a == c || b == c || a == b {
        return Err(Error::Precondition("betweenness needs three distinct classes".into()));
    }
    for (x, y) in [(a, b), (a, c), (b, c)] {
        gap_of_class(&x.angles, &y.angles)?;
        gap_of_class(&y.angles, &x.angles)?;
    }
    Ok(gap_of_class(&c.angles, &a.angles)? != gap_of_class(&c.angles, &b.angles)?)
}

fn merge_overlapping(sets: Vec<Vec<Angle>>) -> Vec<MarkedClass> {
    let n = sets.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    let mut owner: HashMap<&Angle, usize> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for x in s {
            if let Some(&j) = owner.get(x) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            } else {
                owner.insert(x, i);
            }
        }
    }
    let mut groups: HashMap<usize, BTreeSet<Angle>> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().extend(s.iter().cloned());
    }
    let mut out: Vec<MarkedClass> = groups
        .into_values()
        .map(|g| MarkedClass::new(g.into_iter().collect()))
        .collect();
    out.sort_by(|a, b| a.min_angle().cmp(b.min_angle()));
    out
}

pub fn postcritical_classes(theta: &Angle) -> Result<Postcritical> {
    if theta.is_zero() {
        return Err(Error::Precondition("θ = 0 has no postcritical tree".into()));
    }
    let orb = orbit2(theta);
    let mut sets = orbit_classes(theta, theta);
    let crit: Vec<Angle> = sets[0]
        .iter()
        .flat_map(|x| {
            let a = x.halve();
            [a.antipode(), a]
        })
        .collect();
    sets.push(crit);
    let classes = merge_overlapping(sets);
    let find = |x: &Angle| classes.iter().position(|c| c.contains(x)).expect("every orbit point is classified");
    let orbit_class = orb.points.iter().map(find).collect();
    let critical = find(&theta.halve());
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            gap_of_class(&classes[i].angles, &classes[j].angles)?;
            gap_of_class(&classes[j].angles, &classes[i].angles)?;
        }
    }
    Ok(Postcritical {
        classes,
        orbit_class,
        critical,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexKind {
    Marked,
    Steiner { triple: [usize; 3] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeVertex {
    pub angles: Vec<Angle>,
    #[serde(flatten)]
    pub kind: VertexKind,
}

impl TreeVertex {
    pub fn is_marked(&self) -> bool {
        matches!(self.kind, VertexKind::Marked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubbardTree {
    pub theta: Angle,
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<(usize, usize)>,
    pub vertex_map: Vec<usize>,
    pub marked_critical: usize,
    /// Vertex of the critical value (the class of θ).
    pub critical_value: usize,
}

/// Undirected tree stored as adjacency lists.
#[derive(Debug, Clone)]
struct Adj {
    nbrs: Vec<Vec<usize>>,
    /// Parent and depth in a breadth-first forest, with component roots as
    /// their own parents.
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl Adj {
    fn new(n: usize, edges: &[(usize, usize)]) -> Adj {
        let mut nbrs = vec![Vec::new(); n];
        for &(u, v) in edges {
            nbrs[u].push(v);
            nbrs[v].push(u);
        }
        for l in &mut nbrs {
            l.sort_unstable();
        }
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0; n];
        for root in 0..n {
            if parent[root] != usize::MAX {
                continue;
            }
            parent[root] = root;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &v in &nbrs[u] {
                    if parent[v] == usize::MAX {
                        parent[v] = u;
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        Adj { nbrs, parent, depth }
    }

    /// Tree path from `from` to `to`; empty if they lie in different components.
    /// Only meaningful once the graph is known to be a forest.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let (mut a, mut b) = (from, to);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while self.depth[a] > self.depth[b] {
            head.push(a);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            tail.push(b);
            b = self.parent[b];
        }
        while a != b {
            if self.parent[a] == a {
                return Vec::new();
            }
            head.push(a);
            tail.push(b);
            a = self.parent[a];
            b = self.parent[b];
        }
        head.push(a);
        head.extend(tail.into_iter().rev());
        head
    }

    fn distances(&self, from: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.nbrs.len()];
        d[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.nbrs[u] {
                if d[v] == usize::MAX {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        d
    }

    fn is_tree(&self) -> bool {
        let n = self.nbrs.len();
        if n == 0 {
            return true;
        }
        let e: usize = self.nbrs.iter().map(Vec::len).sum::<usize>() / 2;
        if e + 1 != n {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.nbrs[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Vertices reachable from `start` without passing through `blocked`, in
    /// breadth-first order.
    fn branch(&self, start: usize, blocked: usize) -> Vec<usize> {
        let mut seen = HashSet::from([blocked, start]);
        let mut out = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.nbrs[u] {
                if seen.insert(v) {
                    out.push(v);
                    queue.push_back(v);
                }
            }
        }
        out
    }

    fn median(&self, a: usize, b: usize, c: usize) -> usize {
        let pab: HashSet<usize> = self.path(a, b).into_iter().collect();
        let pac: HashSet<usize> = self.path(a, c).into_iter().collect();
        let pbc = self.path(b, c);
        *pbc.iter()
            .find(|v| pab.contains(v) && pac.contains(v))
            .expect("three paths in a tree share their median")
    }
}

/// Partner of the smallest of four classes (`None` for a star).
type Split = Option<(usize, usize)>;

fn split_pairs(set: [usize; 4], split: Split) -> Option<[(usize, usize); 2]> {
    let (x, y) = split?;
    let rest: Vec<usize> = set.iter().copied().filter(|&v| v != x && v != y).collect();
    Some([(x, y), (rest[0], rest[1])])
}

fn normalize_split(set: &[usize; 4], x: usize, y: usize) -> Split {
    let min = *set.iter().min().expect("four items");
    if x == min || y == min {
        Some((min, if x == min { y } else { x }))
    } else {
        let other = set.iter().copied().find(|&v| v != x && v != y && v != min).expect("fourth");
        Some((min, other))
    }
}

struct QuartetOracle<'a> {
    /// Bipartite class/region tree; classes are `0..n_classes`.
    t0: &'a Adj,
    n_classes: usize,
    image: &'a [usize],
    memo: HashMap<[usize; 4], Split>,
    active: HashSet<[usize; 4]>,
}

enum PairRelation {
    Disjoint,
    Meet,
    Through { region: usize },
}

impl<'a> QuartetOracle<'a> {
    fn relation(&self, a: usize, b: usize, c: usize, d: usize) -> PairRelation {
        let p1 = self.t0.path(a, b);
        let common: Vec<usize> = self.t0.path(c, d).into_iter().filter(|v| p1.contains(v)).collect();
        match common.as_slice() {
            [] => PairRelation::Disjoint,
            [r] if *r >= self.n_classes => PairRelation::Through { region: *r },
            _ => PairRelation::Meet,
        }
    }

    fn port(&self, x: usize, region: usize) -> usize {
        let p = self.t0.path(x, region);
        p[p.len() - 2]
    }

    fn quartet(&mut self, q: [usize; 4]) -> Result<Split> {
        let mut key = q;
        key.sort_unstable();
        if let Some(&s) = self.memo.get(&key) {
            return Ok(s);
        }
        if self.active.contains(&key) {
            return Ok(None);
        }
        let [a, b, c, d] = key;
        let pairings = [(a, b, c, d), (a, c, b, d), (a, d, b, c)];
        let mut region = None;
        let mut result: Option<Split> = None;
        for &(w, x, y, z) in &pairings {
            match self.relation(w, x, y, z) {
                PairRelation::Disjoint => {
                    result = Some(normalize_split(&key, w, x));
                    break;
                }
                PairRelation::Through { region: r } => region = Some(r),
                PairRelation::Meet => {}
            }
        }
        let result = match (result, region) {
            (Some(s), _) => s,
            (None, None) => None,
            (None, Some(r)) => {
                let ports = key.map(|v| self.port(v, r));
                self.active.insert(key);
                let sub = if ports == key {
                    let img = key.map(|v| self.image[v]);
                    let distinct: HashSet<usize> = img.iter().copied().collect();
                    if distinct.len() != 4 {
                        self.active.remove(&key);
                        return Err(Error::Internal(format!(
                            "classes {key:?} bounding one region have colliding images"
                        )));
                    }
                    self.quartet(img).map(|s| (s, img))
                } else {
                    self.quartet(ports).map(|s| (s, ports))
                };
                self.active.remove(&key);
                let (s, targets) = sub?;
                // Translate the split of the targets back to the keys.
                match split_pairs(
                    {
                        let mut t = targets;
                        t.sort_unstable();
                        t
                    },
                    s,
                ) {
                    None => None,
                    Some([(x, y), _]) => {
                        let i = targets.iter().position(|&t| t == x).expect("target");
                        let j = targets.iter().position(|&t| t == y).expect("target");
                        normalize_split(&key, key[i], key[j])
                    }
                }
            }
        };
        self.memo.insert(key, result);
        Ok(result)
    }
}

/// Small planar tree on the boundary classes of one region.
struct LocalTree {
    /// Node ids: leaves are class ids, Steiner nodes are `STEINER_BASE + k`.
    edges: Vec<(usize, usize)>,
    steiner: usize,
}

const STEINER_BASE: usize = usize::MAX / 2;

#[derive(Clone, Copy)]
enum Attach {
    AtNode(usize),
    OnEdge(usize),
}

/// Inserts the classes one at a time, keeping the unique placement consistent
/// with the oracle. Candidate distances are in half-edge units so that
/// subdividing an edge leaves existing distances unchanged.
fn resolve_region(classes: &[usize], oracle: &mut QuartetOracle) -> Result<LocalTree> {
    // Node 0 is the first Steiner point; `class[v]` is `None` for Steiner nodes.
    let mut class: Vec<Option<usize>> = vec![None, Some(classes[0]), Some(classes[1]), Some(classes[2])];
    let mut edges = vec![(0, 1), (0, 2), (0, 3)];
    let mut leaves = vec![1, 2, 3];
    for &x in &classes[3..] {
        let adj = Adj::new(class.len(), &edges);
        let dist: Vec<Vec<usize>> = (0..class.len()).map(|v| adj.distances(v)).collect();
        let candidates = (0..class.len())
            .filter(|&v| class[v].is_none())
            .map(Attach::AtNode)
            .chain((0..edges.len()).map(Attach::OnEdge));
        let nl = leaves.len();
        let mut fits = Vec::new();
        for cand in candidates {
            let dx: Vec<usize> = leaves
                .iter()
                .map(|&l| match cand {
                    Attach::AtNode(s) => 2 * dist[s][l] + 2,
                    Attach::OnEdge(i) => {
                        let (u, v) = edges[i];
                        2 * dist[u][l].min(dist[v][l]) + 3
                    }
                })
                .collect();
            let (l0, c0) = (leaves[0], class[leaves[0]].expect("leaf"));
            let mut ok = true;
            // Quartets through a fixed anchor leaf are rooted triplets, which
            // already pin down the attachment point.
            'outer: for j in 1..nl {
                for k in j + 1..nl {
                    let (lj, lk) = (leaves[j], leaves[k]);
                    let (cj, ck) = (class[lj].expect("leaf"), class[lk].expect("leaf"));
                    let sums = [
                        (dx[0] + 2 * dist[lj][lk], c0),
                        (dx[j] + 2 * dist[l0][lk], cj),
                        (dx[k] + 2 * dist[l0][lj], ck),
                    ];
                    let min = sums.iter().map(|t| t.0).min().expect("three sums");
                    let mut winners = sums.iter().filter(|t| t.0 == min);
                    let key = [x, c0, cj, ck];
                    let split = match (winners.next(), winners.next()) {
                        (Some(&(_, partner)), None) => normalize_split(&key, x, partner),
                        _ => None,
                    };
                    if split != oracle.quartet(key)? {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                fits.push(cand);
            }
        }
        if fits.len() != 1 {
            return Err(Error::Internal(format!(
                "{} placements of class {x} are consistent with the quartet splits",
                fits.len()
            )));
        }
        let node = class.len();
        class.push(Some(x));
        leaves.push(node);
        match fits[0] {
            Attach::AtNode(s) => edges.push((s, node)),
            Attach::OnEdge(i) => {
                let (u, v) = edges[i];
                let s = class.len();
                class.push(None);
                edges[i] = (u, s);
                edges.push((s, v));
                edges.push((s, node));
            }
        }
    }
    let mut steiner_id = HashMap::new();
    for (v, c) in class.iter().enumerate() {
        if c.is_none() {
            let k = steiner_id.len();
            steiner_id.insert(v, STEINER_BASE + k);
        }
    }
    let label = |v: usize| class[v].unwrap_or_else(|| steiner_id[&v]);
    Ok(LocalTree {
        edges: edges.iter().map(|&(u, v)| (label(u), label(v))).collect(),
        steiner: steiner_id.len(),
    })
}

/// Regions of the disk bounded by the class hulls: each entry lists the classes
/// met along the region boundary, in circular order.
fn regions(classes: &[MarkedClass]) -> Vec<Vec<usize>> {
    let mut pts: Vec<(&Angle, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.angles.iter().map(move |x| (x, k)))
        .collect();
    pts.sort();
    let n = pts.len();
    let mut prev_member = vec![0usize; n];
    let mut last_seen: HashMap<usize, usize> = HashMap::new();
    for round in 0..2 {
        for (i, &(_, k)) in pts.iter().enumerate() {
            if round == 1 {
                prev_member[i] = last_seen[&k];
            }
            last_seen.insert(k, i);
        }
    }
    // Arc i runs from pts[i] to pts[i+1]; at its end, jump back along the
    // hull side of that class to the previous member and continue.
    let mut visited = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut region = Vec::new();
        let mut arc = start;
        while !visited[arc] {
            visited[arc] = true;
            let end = (arc + 1) % n;
            let k = pts[end].1;
            if region.last() != Some(&k) {
                region.push(k);
            }
            arc = prev_member[end];
        }
        if region.len() > 1 && region.first() == region.last() {
            region.pop();
        }
        let distinct: BTreeSet<usize> = region.iter().copied().collect();
        if distinct.len() >= 2 {
            out.push(region);
        }
    }
    out
}

pub fn build_tree(theta: &Angle) -> Result<HubbardTree> {
    if theta.is_zero() {
        return Ok(HubbardTree {
            theta: theta.clone(),
            vertices: vec![TreeVertex {
                angles: vec![Angle::zero(), Angle::half()],
                kind: VertexKind::Marked,
            }],
            edges: Vec::new(),
            vertex_map: vec![0],
            marked_critical: 0,
            critical_value: 0,
        });
    }
    let pc = postcritical_classes(theta)?;
    let classes = &pc.classes;
    let nc = classes.len();

    // Image of each class under doubling; must be a single class.
    let class_of: HashMap<&Angle, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.angles.iter().map(move |x| (x, k)))
        .collect();
    let mut image = vec![0usize; nc];
    for (k, c) in classes.iter().enumerate() {
        let imgs: BTreeSet<usize> = c
            .angles
            .iter()
            .map(|x| class_of.get(&x.double()).copied())
            .collect::<Option<_>>()
            .ok_or_else(|| Error::NonMarkov(format!("image of class {:?} is unmarked", c.angles)))?;
        if imgs.len() != 1 {
            return Err(Error::NonMarkov(format!("class {:?} maps onto several classes", c.angles)));
        }
        image[k] = *imgs.iter().next().expect("one image");
    }

    let regs = regions(classes);
    let mut t0_edges = Vec::new();
    for (r, reg) in regs.iter().enumerate() {
        let distinct: BTreeSet<usize> = reg.iter().copied().collect();
        for k in distinct {
            t0_edges.push((k, nc + r));
        }
    }
    let t0 = Adj::new(nc + regs.len(), &t0_edges);
    if !t0.is_tree() {
        return Err(Error::Internal("class/region incidence graph is not a tree".into()));
    }

    let mut oracle = QuartetOracle {
        t0: &t0,
        n_classes: nc,
        image: &image,
        memo: HashMap::new(),
        active: HashSet::new(),
    };
    let mut vertices: Vec<TreeVertex> = classes
        .iter()
        .map(|c| TreeVertex {
            angles: c.angles.clone(),
            kind: VertexKind::Marked,
        })
        .collect();
    let mut edges = Vec::new();
    for reg in &regs {
        let mut bound: Vec<usize> = Vec::new();
        for &k in reg {
            if !bound.contains(&k) {
                bound.push(k);
            }
        }
        if bound.len() == 2 {
            edges.push((bound[0], bound[1]));
            continue;
        }
        let local = resolve_region(&bound, &mut oracle)?;
        let mut ids: HashMap<usize, usize> = HashMap::new();
        for k in 0..local.steiner {
            ids.insert(STEINER_BASE + k, vertices.len());
            vertices.push(TreeVertex {
                angles: Vec::new(),
                kind: VertexKind::Steiner { triple: [0; 3] },
            });
        }
        for &(u, v) in &local.edges {
            let m = |x: usize| if x >= STEINER_BASE { ids[&x] } else { x };
            edges.push((m(u), m(v)));
        }
    }
    let nv = vertices.len();
    let adj = Adj::new(nv, &edges);
    if !adj.is_tree() {
        return Err(Error::Internal("reconstructed graph is not a tree".into()));
    }

    // Induced map on Steiner vertices: median of the images of three marked
    // classes in distinct branches.
    let mut vertex_map: Vec<usize> = (0..nv).map(|v| if v < nc { image[v] } else { usize::MAX }).collect();
    for s in nc..nv {
        let reps: Vec<usize> = adj.nbrs[s]
            .iter()
            .map(|&n| {
                *adj.branch(n, s)
                    .iter()
                    .find(|&&v| v < nc)
                    .expect("every branch contains a marked class")
            })
            .collect();
        let triple = [reps[0], reps[1], reps[2]];
        let f = adj.median(image[triple[0]], image[triple[1]], image[triple[2]]);
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                for k in j + 1..reps.len() {
                    if adj.median(image[reps[i]], image[reps[j]], image[reps[k]]) != f {
                        return Err(Error::NonMarkov(format!(
                            "branch point between classes {:?} has no single image",
                            reps.iter().map(|&r| classes[r].angles.clone()).collect::<Vec<_>>()
                        )));
                    }
                }
            }
        }
        vertices[s].kind = VertexKind::Steiner { triple };
        vertex_map[s] = f;
    }

    assign_steiner_angles(theta, &mut vertices, &vertex_map, &adj, nc, pc.critical)?;

    let mut tree = HubbardTree {
        theta: theta.clone(),
        vertices,
        edges,
        vertex_map,
        marked_critical: pc.critical,
        critical_value: pc.orbit_class[0],
    };
    tree.sort_vertices();
    Ok(tree)
}

fn assign_steiner_angles(
    theta: &Angle,
    vertices: &mut [TreeVertex],
    vertex_map: &[usize],
    adj: &Adj,
    nc: usize,
    crit: usize,
) -> Result<()> {
    let nv = vertices.len();
    if nv == nc {
        return Ok(());
    }
    let pt = portrait(theta);
    // Side of the critical point on which each Steiner vertex lies.
    let mut side = vec![Symbol::Star; nv];
    for s in nc..nv {
        let comp = adj.branch(s, crit);
        let m = comp.iter().find(|&&v| v < nc).expect("component holds a marked class");
        side[s] = pt.symbol(&vertices[*m].angles[0]);
        if side[s] == Symbol::Star {
            return Err(Error::Internal("marked class touches the critical portrait".into()));
        }
    }
    let mut done: Vec<bool> = (0..nv).map(|v| v < nc).collect();
    for s in nc..nv {
        if done[s] {
            continue;
        }
        // Follow the forward orbit until a known vertex or a cycle.
        let mut path = vec![s];
        let mut seen = HashMap::from([(s, 0usize)]);
        let mut cur = vertex_map[s];
        loop {
            if done[cur] {
                break;
            }
            if let Some(&i) = seen.get(&cur) {
                let cycle: Vec<usize> = path[i..].to_vec();
                let angles = periodic_steiner_angles(&pt, &cycle, &side)?;
                let mut a = angles;
                for &v in &cycle {
                    vertices[v].angles = a.clone();
                    done[v] = true;
                    a = a.iter().map(Angle::double).collect();
                    a.sort();
                }
                path.truncate(i);
                break;
            }
            seen.insert(cur, path.len());
            path.push(cur);
            cur = vertex_map[cur];
        }
        for &v in path.iter().rev() {
            let target = &vertices[vertex_map[v]].angles;
            let mut a: Vec<Angle> = target
                .iter()
                .flat_map(|y| {
                    let h = y.halve();
                    [h.antipode(), h]
                })
                .filter(|x| pt.symbol(x) == side[v])
                .collect();
            a.sort();
            vertices[v].angles = a;
            done[v] = true;
        }
    }
    for s in nc..nv {
        let deg = adj.nbrs[s].len();
        if vertices[s].angles.len() < deg {
            return Err(Error::NonMarkov(format!(
                "branch point of degree {deg} received {} rays",
                vertices[s].angles.len()
            )));
        }
        // Distinct branches must fall into distinct gaps of the branch point.
        let mut gaps = BTreeSet::new();
        for &n in &adj.nbrs[s] {
            let m = *adj.branch(n, s).iter().find(|&&v| v < nc).expect("marked");
            let g = gap_of_class(&vertices[s].angles, &vertices[m].angles)
                .map_err(|e| Error::NonMarkov(format!("branch point rays inconsistent: {e}")))?;
            gaps.insert(g);
        }
        if gaps.len() != deg {
            return Err(Error::NonMarkov("branch point rays do not separate its branches".into()));
        }
    }
    Ok(())
}

const MAX_STEINER_RAY_PERIOD: usize = 96;

fn periodic_steiner_angles(
    pt: &crate::itinerary::CriticalPortrait,
    cycle: &[usize],
    side: &[Symbol],
) -> Result<Vec<Angle>> {
    let k = cycle.len();
    let word: Vec<Symbol> = cycle.iter().map(|&v| side[v]).collect();
    let mut q = 1;
    while k * q <= MAX_STEINER_RAY_PERIOD {
        let w: Vec<Symbol> = word.iter().copied().cycle().take(k * q).collect();
        let found: Vec<Angle> = periodic_fiber(pt, &w)
            .into_iter()
            .filter(|x| orbit2(x).period == k * q)
            .collect();
        if !found.is_empty() {
            return Ok(found);
        }
        q += 1;
    }
    Err(Error::NonMarkov(format!(
        "no rays found for a periodic branch point of period {k}"
    )))
}

impl HubbardTree {
    fn sort_vertices(&mut self) {
        let n = self.vertices.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.vertices[a].angles.cmp(&self.vertices[b].angles));
        let mut new_id = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        self.vertices = order
            .iter()
            .map(|&v| {
                let mut t = self.vertices[v].clone();
                if let VertexKind::Steiner { triple } = &mut t.kind {
                    *triple = triple.map(|x| new_id[x]);
                }
                t
            })
            .collect();
        self.vertex_map = order.iter().map(|&v| new_id[self.vertex_map[v]]).collect();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (u, v) = (new_id[u], new_id[v]);
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        self.edges = edges;
        self.marked_critical = new_id[self.marked_critical];
        self.critical_value = new_id[self.critical_value];
    }

    fn adj(&self) -> Adj {
        Adj::new(self.vertices.len(), &self.edges)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_path(&self) -> bool {
        (0..self.vertices.len()).all(|v| self.degree(v) <= 2)
    }

    /// Vertices on the tree path from `a` to `b`, inclusive.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        self.adj().path(a, b)
    }

    fn edge_index(&self) -> HashMap<(usize, usize), usize> {
        self.edges.iter().enumerate().map(|(i, &(u, v))| ((u, v), i)).collect()
    }

    /// Edge ids along the path from `a` to `b`.
    pub fn path_edges(&self, a: usize, b: usize) -> Vec<usize> {
        let idx = self.edge_index();
        self.path(a, b)
            .windows(2)
            .map(|w| idx[&(w[0].min(w[1]), w[0].max(w[1]))])
            .collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.degree(v) == 1).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph hubbard {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let label: Vec<String> = v.angles.iter().map(Angle::to_string).collect();
            let shape = match (&v.kind, i == self.marked_critical) {
                (_, true) => "doublecircle",
                (VertexKind::Marked, _) => "ellipse",
                (VertexKind::Steiner { .. }, _) => "box",
            };
            let _ = writeln!(s, "  v{i} [label=\"{}\", shape={shape}];", label.join(" "));
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "  v{u} -- v{v};");
        }
        s.push_str("}\n");
        s
    }
}

/// Markov matrix of the tree map on edges.
pub fn edge_markov(t: &HubbardTree) -> TransitionGraph<(usize, usize)> {
    let adj = t.adj();
    let idx = t.edge_index();
    let rows = t
        .edges
        .iter()
        .map(|&(u, v)| {
            let p = adj.path(t.vertex_map[u], t.vertex_map[v]);
            p.windows(2)
                .map(|w| (idx[&(w[0].min(w[1]), w[0].max(w[1]))], 1u64))
                .collect()
        })
        .collect();
    TransitionGraph::from_rows(t.edges.clone(), rows)
}

pub fn tree_entropy(theta: &Angle) -> Result<EntropyResult> {
    tree_entropy_with(theta, &SpectralConfig::default())
}

pub fn tree_entropy_with(theta: &Angle, cfg: &SpectralConfig) -> Result<EntropyResult> {
    let t = build_tree(theta)?;
    entropy_of(&edge_markov(&t), cfg, Method::Tree)
}

/// Re-checks that the tree path between marked classes matches circular
/// separation for every marked triple.
pub fn check_betweenness(t: &HubbardTree) -> Result<bool> {
    let marked: Vec<usize> = (0..t.vertices.len()).filter(|&v| t.vertices[v].is_marked()).collect();
    let adj = t.adj();
    let cls: Vec<MarkedClass> = t.vertices.iter().map(|v| MarkedClass::new(v.angles.clone())).collect();
    for &a in &marked {
        for &b in &marked {
            if b <= a {
                continue;
            }
            let path: HashSet<usize> = adj.path(a, b).into_iter().collect();
            for &c in &marked {
                if c == a || c == b {
                    continue;
                }
                if path.contains(&c) != betweenness(&cls[a], &cls[c], &cls[b])? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn primitive_bound_check(r: &ComponentRoot) -> Result<bool> {
    if r.satellite {
        return Err(Error::Precondition(format!("{r} is a satellite root")));
    }
    let h = crate::entropy::core_entropy(&r.minus)?.h;
    Ok(h >= std::f64::consts::LN_2 / r.period as f64 - 1e-9)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Horseshoe {
    /// Endpoints of γ and of the two sub-paths, as vertex ids.
    pub gamma: (usize, usize),
    pub gamma1: (usize, usize),
    pub gamma2: (usize, usize),
    pub k: usize,
}

/// Searches for a path γ split at an interior vertex into γ1, γ2 such that
/// `f^k(γ1)` and `f^k(γ2)` both cover γ, for some `k ≤ k_max`.
pub fn find_horseshoe(r: &ComponentRoot, k_max: usize) -> Result<Option<Horseshoe>> {
    if r.satellite {
        return Err(Error::Precondition(format!("{r} is a satellite root")));
    }
    let t = build_tree(&r.minus)?;
    let m = edge_markov(&t);
    let ne = t.edges.len();
    // covers[k][e] = edge set covered by f^k(e), as bitsets over edges.
    let words = ne.div_ceil(64).max(1);
    let mut covers: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut cur: Vec<Vec<u64>> = (0..ne)
        .map(|e| {
            let mut b = vec![0u64; words];
            b[e / 64] |= 1 << (e % 64);
            b
        })
        .collect();
    for _ in 0..k_max {
        let next: Vec<Vec<u64>> = cur
            .iter()
            .map(|set| {
                let mut b = vec![0u64; words];
                for e in 0..ne {
                    if set[e / 64] >> (e % 64) & 1 == 1 {
                        for &(j, _) in &m.adjacency[e] {
                            b[j / 64] |= 1 << (j % 64);
                        }
                    }
                }
                b
            })
            .collect();
        covers.push(next.clone());
        cur = next;
    }
    let union = |k: usize, es: &[usize]| {
        let mut b = vec![0u64; words];
        for &e in es {
            for (w, x) in b.iter_mut().zip(&covers[k][e]) {
                *w |= x;
            }
        }
        b
    };
    let contains = |big: &[u64], es: &[usize]| es.iter().all(|&e| big[e / 64] >> (e % 64) & 1 == 1);
    let nv = t.vertices.len();
    for k in 1..=k_max {
        for a in 0..nv {
            for b in a + 1..nv {
                let path = t.path(a, b);
                if path.len() < 3 {
                    continue;
                }
                let edges = t.path_edges(a, b);
                for cut in 1..path.len() - 1 {
                    let (e1, e2) = edges.split_at(cut);
                    if contains(&union(k - 1, e1), &edges) && contains(&union(k - 1, e2), &edges) {
                        return Ok(Some(Horseshoe {
                            gamma: (a, b),
                            gamma1: (a, path[cut]),
                            gamma2: (path[cut], b),
                            k,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}
