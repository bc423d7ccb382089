//! Instance factories: the seeded random block-structured generator, affine
//! designs and planes partitions, and the families with known exact
//! (closure value, integer optimum) pairs used to verify the bound theory.

use crate::instance::{q, Axis, BlockPartition, Instance, Kind, Q, Relation, Row, Sense};
use crate::kernel::{optimize_over_points, solve_hull_program, HullSpec, KernelError, LinkMode,
    PointSet, SolveStatus};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// n partitions of [n²] into n-sets with pairwise cross-partition
/// intersections of size at most 1, built from the parallel line classes
/// of slope s in the affine plane over Z_n.
#[derive(Debug, Clone)]
pub struct AffineDesign {
    pub n: usize,
    pub families: Vec<Vec<BTreeSet<usize>>>,
}

impl AffineDesign {
    pub fn check(&self) -> bool {
        let nn = self.n * self.n;
        if self.families.len() != self.n {
            return false;
        }
        for f in &self.families {
            if f.len() != self.n || f.iter().any(|m| m.len() != self.n) {
                return false;
            }
            let union: BTreeSet<usize> = f.iter().flatten().copied().collect();
            if union.len() != nn || union.iter().any(|&p| p >= nn) {
                return false;
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                for a in &self.families[i] {
                    for b in &self.families[j] {
                        if a.intersection(b).count() > 1 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

pub fn make_affine_design(n: usize) -> Result<AffineDesign, ConstructionError> {
    if !is_prime(n) {
        return Err(ConstructionError::NotPrime(n));
    }
    // Point (x, y) gets index x*n + y; family s is the parallel class of
    // lines y = s*x + b (the vertical class is left out).
    let mut families = Vec::with_capacity(n);
    for s in 0..n {
        let mut family = Vec::with_capacity(n);
        for b in 0..n {
            family.push((0..n).map(|x| x * n + (s * x + b) % n).collect::<BTreeSet<usize>>());
        }
        families.push(family);
    }
    let design = AffineDesign { n, families };
    assert!(design.check(), "affine design invariant failed for n={n}");
    Ok(design)
}

pub const PLANES_CAP: usize = 256;

/// n partitions of [n^n] into n sets of size n^{n-1} such that any
/// cross-partition selection has a common element. Built from the
/// coordinate fibers of the mixed-radix bijection g(u) = Σ u_i n^i.
#[derive(Debug, Clone)]
pub struct PlanesPartition {
    pub n: usize,
    pub families: Vec<Vec<BTreeSet<usize>>>,
}

impl PlanesPartition {
    pub fn check(&self) -> bool {
        let total = self.n.pow(self.n as u32);
        for f in &self.families {
            if f.len() != self.n {
                return false;
            }
            let union: BTreeSet<usize> = f.iter().flatten().copied().collect();
            if union.len() != total {
                return false;
            }
            if f.iter().any(|g| g.len() != total / self.n) {
                return false;
            }
        }
        // Every cross-selection intersects.
        let mut pick = vec![0usize; self.n];
        loop {
            let mut inter: BTreeSet<usize> = self.families[0][pick[0]].clone();
            for i in 1..self.n {
                inter = inter.intersection(&self.families[i][pick[i]]).copied().collect();
            }
            if inter.is_empty() {
                return false;
            }
            let mut i = 0;
            loop {
                if i == self.n {
                    return true;
                }
                pick[i] += 1;
                if pick[i] < self.n {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }
}

pub fn make_planes_partition(n: usize) -> Result<PlanesPartition, ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::BadParams(format!("n = {n} < 2")));
    }
    let total = n.checked_pow(n as u32).filter(|&t| t <= PLANES_CAP).ok_or_else(|| {
        ConstructionError::CapExceeded(format!("n^n for n = {n} exceeds {PLANES_CAP}"))
    })?;
    let mut families = Vec::with_capacity(n);
    for i in 0..n {
        let radix = n.pow(i as u32);
        let mut family = vec![BTreeSet::new(); n];
        for u in 0..total {
            family[(u / radix) % n].insert(u);
        }
        families.push(family);
    }
    let planes = PlanesPartition { n, families };
    assert!(planes.check(), "planes partition invariant failed for n={n}");
    Ok(planes)
}

/// Parameters of the random block-structured generator.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub nv: usize,
    /// Edge probability, as an exact rational in (0, 1].
    pub p: Q,
    pub sqr: usize,
    pub coeff_max: u64,
    pub eps_max: u64,
    pub obj_max: u64,
    pub seed: u64,
    pub kind: Kind,
    /// Use a fixed star (node 0 = first stage) instead of a random graph.
    pub two_stage: bool,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), ConstructionError> {
        if self.nv < 2 || self.sqr < 1 || self.coeff_max < 1 || self.eps_max < 1
            || self.obj_max < 1
        {
            return Err(ConstructionError::BadParams(
                "need nv >= 2, sqr >= 1, magnitude caps >= 1".into(),
            ));
        }
        if !(self.p > Q::zero() && self.p <= Q::one()) {
            return Err(ConstructionError::BadParams("edge probability must be in (0, 1]".into()));
        }
        Ok(())
    }
}

fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; nv];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v { b } else if b == v { a } else { continue };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Random block-structured binary instance over a connected graph.
///
/// The PRNG is ChaCha8 seeded with `seed`; sub-streams keep the draws
/// independent of each other: stream 0 drives the graph (pairs in
/// lexicographic order, redrawn wholesale until connected), stream
/// `1 + e*nv + v` fills the sqr×sqr block of edge `e` and endpoint `v`
/// (row-major), stream `E*nv + 1` draws the right-hand-side data (a
/// Bernoulli 0/1 vector with density from {0.2, 0.4, 0.6, 0.8}, then one
/// noise term per row), and stream `E*nv + 2` draws the objective.
pub fn gen_random_instance(
    params: &GenParams,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    params.validate()?;
    let nv = params.nv;
    let sqr = params.sqr;
    let pairs: Vec<(usize, usize)> =
        (0..nv).flat_map(|i| (i + 1..nv).map(move |j| (i, j))).collect();
    let edges: Vec<(usize, usize)> = if params.two_stage {
        (1..nv).map(|j| (0, j)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(0);
        let num = params.p.numer().to_u64().ok_or_else(|| {
            ConstructionError::BadParams("edge probability numerator too large".into())
        })?;
        let den = params.p.denom().to_u64().ok_or_else(|| {
            ConstructionError::BadParams("edge probability denominator too large".into())
        })?;
        loop {
            let es: Vec<(usize, usize)> =
                pairs.iter().copied().filter(|_| rng.gen_range(0..den) < num).collect();
            if !es.is_empty() && connected(nv, &es) {
                break es;
            }
        }
    };
    let ne = edges.len();
    let ncols = nv * sqr;
    let nrows = ne * sqr;
    let negate = params.kind == Kind::General;
    // Dense row-major matrix of i64 entries.
    let mut a = vec![vec![0i64; ncols]; nrows];
    for (e, &(u, v)) in edges.iter().enumerate() {
        for node in [u, v] {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(1 + (e * nv + node) as u64);
            for r in 0..sqr {
                for c in 0..sqr {
                    let mut entry = rng.gen_range(1..=params.coeff_max) as i64;
                    if negate && rng.gen_range(0..2u32) == 1 {
                        entry = -entry;
                    }
                    a[e * sqr + r][node * sqr + c] = entry;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream((ne * nv) as u64 + 1);
    // Density drawn from {0.2, 0.4, 0.6, 0.8}, then a Bernoulli 0/1 point.
    let threshold = 2 * (rng.gen_range(0..4u32) + 1);
    let x: Vec<i64> = (0..ncols).map(|_| i64::from(rng.gen_range(0..10u32) < threshold)).collect();
    let mut rows = Vec::with_capacity(nrows);
    for row in &a {
        let ax: i64 = row.iter().zip(&x).map(|(av, xv)| av * xv).sum();
        let eps = rng.gen_range(1..=params.eps_max) as i64;
        let (rel, b) = match params.kind {
            Kind::Covering => (Relation::Ge, (ax - eps).max(0)),
            _ => (Relation::Le, ax + eps),
        };
        let coeffs: Vec<(usize, Q)> = row
            .iter()
            .enumerate()
            .filter(|(_, &av)| av != 0)
            .map(|(j, &av)| (j, q(av)))
            .collect();
        rows.push(Row::new(coeffs, rel, q(b)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream((ne * nv) as u64 + 2);
    let objective: Vec<Q> = (0..ncols).map(|_| q(rng.gen_range(1..=params.obj_max) as i64)).collect();
    let sense = if params.kind == Kind::Covering { Sense::Minimize } else { Sense::Maximize };
    let inst = Instance::binary(sense, params.kind, objective, rows);
    let partition = BlockPartition::new(
        Axis::Columns,
        (0..nv).map(|v| (v * sqr..(v + 1) * sqr).collect()).collect(),
    );
    Ok((inst, partition))
}

fn check_eps(eps: &Q, upper: Q, what: &str) -> Result<(), ConstructionError> {
    if *eps > Q::zero() && *eps < upper {
        Ok(())
    } else {
        Err(ConstructionError::BadParams(format!("{what}: eps out of range")))
    }
}

/// Three binary variables on a triangle: every pair sums to at most
/// 2 − (2/3)ε. The integer optimum is 1 while the single-variable closure
/// value stays near 3.
pub fn make_tight_3cycle(eps: &Q) -> Result<(Instance, BlockPartition), ConstructionError> {
    check_eps(eps, Q::new(3.into(), 2.into()), "3cycle")?;
    let rhs = q(2) - Q::new(2.into(), 3.into()) * eps;
    let rows = [(0usize, 1usize), (1, 2), (0, 2)]
        .iter()
        .map(|&(i, j)| Row::new(vec![(i, Q::one()), (j, Q::one())], Relation::Le, rhs.clone()))
        .collect();
    let inst = Instance::binary(Sense::Maximize, Kind::Packing, vec![q(1); 3], rows);
    Ok((inst, BlockPartition::singletons(Axis::Columns, 3)))
}

/// 2Δ variables paired by rows x_i + x_{Δ+i} ≤ 2 − ε; the first Δ columns
/// form one block, the rest are singletons, giving a star graph.
pub fn make_tight_star_ss(
    delta: usize,
    eps: &Q,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    if delta < 1 {
        return Err(ConstructionError::BadParams("star: delta must be >= 1".into()));
    }
    check_eps(eps, Q::one(), "star")?;
    let rhs = q(2) - eps;
    let rows = (0..delta)
        .map(|i| Row::new(vec![(i, Q::one()), (delta + i, Q::one())], Relation::Le, rhs.clone()))
        .collect();
    let inst = Instance::binary(Sense::Maximize, Kind::Packing, vec![q(1); 2 * delta], rows);
    let mut blocks = vec![(0..delta).collect::<Vec<_>>()];
    blocks.extend((delta..2 * delta).map(|j| vec![j]));
    Ok((inst, BlockPartition::new(Axis::Columns, blocks)))
}

/// n² "point" variables plus Δ "family" variables. Activating family i
/// forbids picking points from two different members of the i-th parallel
/// class. The x-block and y-singletons give a star graph.
pub fn make_tight_tree_ns(
    delta: usize,
    n: usize,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    if !(2 <= delta && delta <= n) {
        return Err(ConstructionError::BadParams("tree: need 2 <= delta <= n".into()));
    }
    let design = make_affine_design(n)?;
    let nn = n * n;
    let mut rows = vec![Row::new(
        (0..nn).map(|j| (j, Q::one())).collect(),
        Relation::Le,
        q(n as i64),
    )];
    for i in 0..delta {
        let fam = &design.families[i];
        for s in 0..n {
            for t in s + 1..n {
                for &a in &fam[s] {
                    for &b in &fam[t] {
                        rows.push(Row::new(
                            vec![(a.min(b), Q::one()), (a.max(b), Q::one()), (nn + i, Q::one())],
                            Relation::Le,
                            q(2),
                        ));
                    }
                }
            }
        }
    }
    let y_weight = Q::new(BigInt::from(n as i64 - 1), BigInt::from(delta as i64 - 1));
    let mut objective = vec![Q::one(); nn];
    objective.extend(vec![y_weight; delta]);
    let inst = Instance::binary(Sense::Maximize, Kind::Packing, objective, rows);
    let mut blocks = vec![(0..nn).collect::<Vec<_>>()];
    blocks.extend((0..delta).map(|i| vec![nn + i]));
    Ok((inst, BlockPartition::new(Axis::Columns, blocks)))
}

/// K blocks of n² variables around a cycle: each block sums to at most n,
/// and picking points from two different members of the i-th parallel
/// class in block i (or i+1) zeroes the neighboring block.
pub fn make_tight_cycle_ns(
    k: usize,
    n: usize,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    if !(3 <= k && k <= n) {
        return Err(ConstructionError::BadParams("cycle: need 3 <= K <= n".into()));
    }
    let design = make_affine_design(n)?;
    let nn = n * n;
    let var = |block: usize, idx: usize| (block % k) * nn + idx;
    let mut rows: Vec<Row> = (0..k)
        .map(|j| {
            Row::new((0..nn).map(|idx| (var(j, idx), Q::one())).collect(), Relation::Le, q(n as i64))
        })
        .collect();
    for i in 0..k {
        let fam = &design.families[i];
        for s in 0..n {
            for t in s + 1..n {
                for &a in &fam[s] {
                    for &b in &fam[t] {
                        for c in 0..nn {
                            for (pair_block, other_block) in [(i, i + 1), (i + 1, i)] {
                                let mut coeffs = vec![
                                    (var(pair_block, a.min(b)), Q::one()),
                                    (var(pair_block, a.max(b)), Q::one()),
                                    (var(other_block, c), Q::one()),
                                ];
                                coeffs.sort_by_key(|(j, _)| *j);
                                rows.push(Row::new(coeffs, Relation::Le, q(2)));
                            }
                        }
                    }
                }
            }
        }
    }
    let inst = Instance::binary(Sense::Maximize, Kind::Packing, vec![q(1); k * nn], rows);
    let blocks = (0..k).map(|j| (j * nn..(j + 1) * nn).collect()).collect();
    Ok((inst, BlockPartition::new(Axis::Columns, blocks)))
}

pub const SSC_CAP: usize = 4;

/// Set cover over the parity structure of {0,1}^q: one variable per vector
/// and one constraint per nonzero vector u, covering the v with odd v·u.
pub fn make_ssc(qq: usize) -> Result<Instance, ConstructionError> {
    if !(1 <= qq && qq <= SSC_CAP) {
        return Err(ConstructionError::BadParams(format!("ssc: need 1 <= q <= {SSC_CAP}")));
    }
    let size = 1usize << qq;
    // The u = 0 row would read 0 >= 1; only nonzero u are emitted.
    let rows = (1..size)
        .map(|u| {
            let coeffs = (0..size)
                .filter(|v| (v & u).count_ones() % 2 == 1)
                .map(|v| (v, Q::one()))
                .collect();
            Row::new(coeffs, Relation::Ge, Q::one())
        })
        .collect();
    Ok(Instance::binary(Sense::Minimize, Kind::Covering, vec![q(1); size], rows))
}

/// Doubled set cover: two copies of the SSC membership matrix side by
/// side, with the column partition {x-block, y-block}.
pub fn make_dsc(qq: usize) -> Result<(Instance, BlockPartition), ConstructionError> {
    if !(1 <= qq && qq <= SSC_CAP) {
        return Err(ConstructionError::BadParams(format!("dsc: need 1 <= q <= {SSC_CAP}")));
    }
    let size = 1usize << qq;
    let rows = (1..size)
        .map(|u| {
            let mut coeffs: Vec<(usize, Q)> = Vec::new();
            for v in 0..size {
                if (v & u).count_ones() % 2 == 1 {
                    coeffs.push((v, Q::one()));
                }
            }
            for v in 0..size {
                if (v & u).count_ones() % 2 == 1 {
                    coeffs.push((size + v, Q::one()));
                }
            }
            Row::new(coeffs, Relation::Ge, Q::one())
        })
        .collect();
    let inst =
        Instance::binary(Sense::Minimize, Kind::Covering, vec![q(1); 2 * size], rows);
    let part = BlockPartition::new(
        Axis::Columns,
        vec![(0..size).collect(), (size..2 * size).collect()],
    );
    Ok((inst, part))
}

/// Covering instance with K scenario blocks of n^n rows each: scenario k
/// uses the k-th member of every parallel class, its columns carrying
/// fiber indicator vectors of the planes partition; a single y variable
/// per scenario satisfies its whole block at a high objective price.
pub fn make_tight_cover(
    k: usize,
    n: usize,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    if k < 1 || n < k.max(2) {
        return Err(ConstructionError::BadParams("cover: need 1 <= K <= n, n >= 2".into()));
    }
    let design = make_affine_design(n)?;
    let planes = make_planes_partition(n)?;
    let nn = n * n;
    let total = n.pow(n as u32);
    if k * total > 512 {
        return Err(ConstructionError::CapExceeded(format!("{k}*{total} rows")));
    }
    let mut rows = Vec::with_capacity(k * total);
    for scenario in 0..k {
        // Identity assignment: the t-th smallest column of the scenario's
        // member in family i carries the indicator of fiber t of plane i.
        let mut coeff = vec![vec![0i64; nn]; total];
        for i in 0..n {
            let member: Vec<usize> = design.families[i][scenario].iter().copied().collect();
            for (t, &j) in member.iter().enumerate() {
                for &r in &planes.families[i][t] {
                    coeff[r][j] += 1;
                }
            }
        }
        for r in 0..total {
            let mut coeffs: Vec<(usize, Q)> = coeff[r]
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(j, &c)| (j, q(c)))
                .collect();
            coeffs.push((nn + scenario, Q::one()));
            rows.push(Row::new(coeffs, Relation::Ge, Q::one()));
        }
    }
    let mut objective = vec![Q::one(); nn];
    objective.extend(vec![q(total as i64); k]);
    let inst = Instance::binary(Sense::Minimize, Kind::Covering, objective, rows);
    let row_blocks = (0..k).map(|s| (s * total..(s + 1) * total).collect()).collect();
    Ok((inst, BlockPartition::new(Axis::Rows, row_blocks)))
}

/// General-kind star: the first K variables sum to exactly 1, and pairing
/// rows x_i + x_j ≤ 2 − ε tie them to the K−1 free variables so that the
/// integer optimum is 1 while the single-block closure stays near K.
pub fn make_tight_general_ss(
    k: usize,
    eps: &Q,
) -> Result<(Instance, BlockPartition), ConstructionError> {
    if k < 2 {
        return Err(ConstructionError::BadParams("general star: need K >= 2".into()));
    }
    check_eps(eps, Q::new(BigInt::from(k as i64 - 1), BigInt::from(k as i64)), "general star")?;
    let nvars = 2 * k - 1;
    let rhs = q(2) - eps;
    let mut rows = vec![Row::new(
        (0..k).map(|i| (i, Q::one())).collect(),
        Relation::Eq,
        Q::one(),
    )];
    for i in 0..k - 1 {
        for j in k..nvars {
            if j != k + i {
                rows.push(Row::new(
                    vec![(i, Q::one()), (j, Q::one())],
                    Relation::Le,
                    rhs.clone(),
                ));
            }
        }
    }
    for j in k..nvars {
        rows.push(Row::new(vec![(k - 1, Q::one()), (j, Q::one())], Relation::Le, rhs.clone()));
    }
    let mut objective = vec![Q::zero(); nvars];
    objective[k - 1] = Q::one();
    for c in objective.iter_mut().take(nvars).skip(k) {
        *c = Q::one();
    }
    let inst = Instance::binary(Sense::Maximize, Kind::General, objective, rows);
    let mut blocks = vec![(0..k).collect::<Vec<_>>()];
    blocks.extend((k..nvars).map(|j| vec![j]));
    Ok((inst, BlockPartition::new(Axis::Columns, blocks)))
}

/// A problem given extensionally by point sets instead of a constraint
/// matrix: the LP relaxation is an intersection of convex hulls, and
/// closure/integer values are computed through the hull-program oracle.
#[derive(Debug, Clone)]
pub struct PointBackedProblem {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Q>,
    pub bounds: Vec<(Q, Option<Q>)>,
    /// Hulls whose intersection defines the LP relaxation.
    pub lp_hulls: Vec<HullSpec>,
    /// Column supports for the sparse closure.
    pub closure_supports: Vec<Vec<usize>>,
    /// Integer points common to all hulls.
    pub common_points: PointSet,
}

impl PointBackedProblem {
    pub fn integer_optimum(&self) -> Q {
        optimize_over_points(&self.common_points, &self.objective, self.sense == Sense::Maximize)
            .map(|(v, _)| v)
            .expect("point-backed problem has integer points")
    }

    fn solve(&self, with_closure: bool) -> Result<Q, KernelError> {
        let mut hulls = self.lp_hulls.clone();
        if with_closure {
            for s in &self.closure_supports {
                hulls.push(HullSpec {
                    coords: s.clone(),
                    points: self.common_points.clone(),
                    mode: LinkMode::Eq,
                });
            }
        }
        let r = solve_hull_program(self.sense, &self.objective, &self.bounds, &[], &hulls)?;
        assert_eq!(r.status, SolveStatus::Optimal, "point-backed solve failed");
        Ok(r.value)
    }

    pub fn lp_value(&self) -> Result<Q, KernelError> {
        self.solve(false)
    }

    pub fn closure_value(&self) -> Result<Q, KernelError> {
        self.solve(true)
    }
}

/// 2K variables (x, y); in the k-th hull, y_k is 1 exactly when x is the
/// k-th unit vector or its complement, and all other coordinates are
/// free. Needs K >= 3: with K = 2 the unit vectors and complements
/// coincide, two y's can be active, and the family loses its gap.
pub fn make_tight_general_ns(k: usize) -> Result<(PointBackedProblem, BlockPartition), ConstructionError> {
    if !(3 <= k && k <= 10) {
        return Err(ConstructionError::BadParams("general cycle-free family: need 3 <= K <= 10".into()));
    }
    let nvars = 2 * k;
    let y_forced = |x: usize, kk: usize| -> bool {
        let unit = 1usize << kk;
        let full = (1usize << k) - 1;
        x == unit || x == full ^ unit
    };
    let mut lp_hulls = Vec::with_capacity(k);
    for kk in 0..k {
        let mut points = Vec::new();
        for x in 0..(1usize << k) {
            for yo in 0..(1usize << (k - 1)) {
                // Spread the free y bits around position kk.
                let mut p = vec![0i64; nvars];
                for i in 0..k {
                    p[i] = ((x >> i) & 1) as i64;
                }
                let mut t = 0;
                for i in 0..k {
                    if i == kk {
                        p[k + i] = i64::from(y_forced(x, kk));
                    } else {
                        p[k + i] = ((yo >> t) & 1) as i64;
                        t += 1;
                    }
                }
                points.push(p);
            }
        }
        lp_hulls.push(HullSpec {
            coords: (0..nvars).collect(),
            points: PointSet { dim: nvars, points },
            mode: LinkMode::Eq,
        });
    }
    let mut common = Vec::new();
    for x in 0..(1usize << k) {
        let mut p = vec![0i64; nvars];
        for i in 0..k {
            p[i] = ((x >> i) & 1) as i64;
            p[k + i] = i64::from(y_forced(x, i));
        }
        common.push(p);
    }
    let mut objective = vec![Q::zero(); nvars];
    for c in objective.iter_mut().skip(k) {
        *c = Q::one();
    }
    let closure_supports: Vec<Vec<usize>> = (0..k)
        .map(|kk| {
            let mut s: Vec<usize> = (0..k).collect();
            s.push(k + kk);
            s
        })
        .collect();
    let problem = PointBackedProblem {
        num_vars: nvars,
        sense: Sense::Maximize,
        objective,
        bounds: vec![(Q::zero(), Some(Q::one())); nvars],
        lp_hulls,
        closure_supports,
        common_points: PointSet { dim: nvars, points: common },
    };
    let mut blocks = vec![(0..k).collect::<Vec<_>>()];
    blocks.extend((0..k).map(|kk| vec![k + kk]));
    Ok((problem, BlockPartition::new(Axis::Columns, blocks)))
}
