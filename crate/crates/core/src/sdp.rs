//! Small dense semidefinite programming engine.
//!
//! Problems are stated over Hermitian (or real symmetric) matrix variables
//! `X_j ⪰ 0`:
//!
//! ```text
//! minimize    Σ_j tr(C_j X_j)
//! subject to  Σ_j tr(A_ij X_j)  (≤ | ≥ | =)  b_i
//!             F_0 + Σ_j s_j · place(X_j) ⪰ 0      (affine LMIs)
//!             X_j ⪰ 0
//! ```
//!
//! An affine LMI places scaled copies of variable blocks as principal
//! sub-blocks of a constant Hermitian matrix, which is enough to state the
//! Schur-complement constraints used by the reconfiguration pipelines.
//!
//! Internally every variable block is flattened into real coordinates, all
//! complex cones are replaced by their real embedding, equality constraints
//! are eliminated through a null-space parametrization, and the remaining
//! problem is solved by a barrier path-following method started from a
//! strictly feasible point (caller supplied, or found by a phase-I problem).

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{check_hermitian, cplx, CMat, RMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Complex,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub usize);

#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub size: usize,
    pub field: Field,
}

/// `tr(coeff · X_block)`.
#[derive(Debug, Clone)]
pub struct Term {
    pub block: BlockId,
    pub coeff: CMat,
}

impl Term {
    pub fn new(block: BlockId, coeff: CMat) -> Self {
        Self { block, coeff }
    }
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<Term>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `scale · X_block` added to the LMI at rows/columns `offset..offset+size`.
#[derive(Debug, Clone)]
pub struct Placement {
    pub block: BlockId,
    pub offset: usize,
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct Lmi {
    pub name: String,
    pub field: Field,
    pub constant: CMat,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub objective: Vec<Term>,
    pub constraints: Vec<LinearConstraint>,
    pub lmis: Vec<Lmi>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Factor applied to the barrier weight `1/t` after each centering.
    pub mu_factor: f64,
    /// Centering stops once half the squared Newton decrement is below this.
    pub newton_tol: f64,
    /// Stop when the certified gap `ν/t` falls below this.
    pub gap_tol: f64,
    /// Cap on Newton steps within one centering.
    pub max_iters: usize,
    pub initial_t: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { mu_factor: 0.2, newton_tol: 1e-9, gap_tol: 1e-7, max_iters: 200, initial_t: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// One value per variable block, in declaration order. Real blocks have
    /// zero imaginary parts.
    pub blocks: Vec<CMat>,
    pub objective: f64,
    /// Certified duality gap `ν/t` of the final barrier iterate.
    pub gap: f64,
    pub max_violation: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn block(&self, id: BlockId) -> &CMat {
        &self.blocks[id.0]
    }
}

#[derive(Debug, Clone)]
pub struct Feasibility {
    pub feasible: bool,
    /// Phase-I optimum: the smallest uniform relaxation `s` of all cones and
    /// inequalities under which the constraint set is satisfiable (floored
    /// at −1). Feasible iff `margin ≤ tol`.
    pub margin: f64,
    pub witness: Option<Vec<CMat>>,
    pub iterations: usize,
}

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-7;

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, size: usize, field: Field) -> BlockId {
        self.blocks.push(Block { name: name.into(), size, field });
        BlockId(self.blocks.len() - 1)
    }

    pub fn set_objective(&mut self, terms: Vec<Term>) {
        self.objective = terms;
    }

    pub fn add_constraint(&mut self, terms: Vec<Term>, sense: Sense, rhs: f64) {
        self.constraints.push(LinearConstraint { terms, sense, rhs });
    }

    pub fn add_lmi(&mut self, name: impl Into<String>, field: Field, constant: CMat, placements: Vec<Placement>) {
        self.lmis.push(Lmi { name: name.into(), field, constant, placements });
    }

    /// Checks dimensions, Hermitian coefficients and field compatibility.
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Dimension("SDP needs at least one block".into()));
        }
        for b in &self.blocks {
            if b.size == 0 {
                return Err(Error::Dimension(format!("block '{}' has size 0", b.name)));
            }
        }
        let check_term = |t: &Term, ctx: &str| -> Result<()> {
            let b = self.blocks.get(t.block.0).ok_or_else(|| {
                Error::Dimension(format!("{ctx}: unknown block {}", t.block.0))
            })?;
            if t.coeff.nrows() != b.size || t.coeff.ncols() != b.size {
                return Err(Error::Dimension(format!(
                    "{ctx}: coefficient is {}x{} but block '{}' is {}x{}",
                    t.coeff.nrows(),
                    t.coeff.ncols(),
                    b.name,
                    b.size,
                    b.size
                )));
            }
            check_hermitian(&t.coeff)
        };
        for t in &self.objective {
            check_term(t, "objective")?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for t in &c.terms {
                check_term(t, &format!("constraint {i}"))?;
            }
            if !c.rhs.is_finite() {
                return Err(Error::Domain(format!("constraint {i} has non-finite rhs")));
            }
        }
        for l in &self.lmis {
            check_hermitian(&l.constant)?;
            let n = l.constant.nrows();
            if l.field == Field::Real && l.constant.iter().any(|z| z.im != 0.0) {
                return Err(Error::Dimension(format!("real LMI '{}' has a complex constant", l.name)));
            }
            for p in &l.placements {
                let b = self.blocks.get(p.block.0).ok_or_else(|| {
                    Error::Dimension(format!("LMI '{}': unknown block {}", l.name, p.block.0))
                })?;
                if p.offset + b.size > n {
                    return Err(Error::Dimension(format!(
                        "LMI '{}': block '{}' at offset {} overflows size {}",
                        l.name, b.name, p.offset, n
                    )));
                }
                if l.field == Field::Real && b.field == Field::Complex {
                    return Err(Error::Dimension(format!(
                        "LMI '{}' is real but hosts complex block '{}'",
                        l.name, b.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump for cross-checking against an external solver.
    ///
    /// Sections appear in a fixed order. Matrix data is written as
    /// `row col re im` lines holding the upper triangle only (0-based).
    ///
    /// ```text
    /// sdp-dump v1
    /// [blocks]          index name size complex|real
    /// [objective]       term <block>, then entries
    /// [constraints]     constraint <index> le|ge|eq <rhs>, then terms
    /// [lmis]            lmi <index> <name> <size> complex|real, constant
    ///                   entries, then `place <block> <offset> <scale>`
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::from("sdp-dump v1\n[blocks]\n");
        for (i, b) in self.blocks.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", b.name, b.size, field_name(b.field));
        }
        out.push_str("[objective]\n");
        for t in &self.objective {
            dump_term(&mut out, t);
        }
        out.push_str("[constraints]\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let sense = match c.sense {
                Sense::Le => "le",
                Sense::Ge => "ge",
                Sense::Eq => "eq",
            };
            let _ = writeln!(out, "constraint {i} {sense} {}", c.rhs);
            for t in &c.terms {
                dump_term(&mut out, t);
            }
        }
        out.push_str("[lmis]\n");
        for (i, l) in self.lmis.iter().enumerate() {
            let _ = writeln!(out, "lmi {i} {} {} {}", l.name, l.constant.nrows(), field_name(l.field));
            dump_entries(&mut out, &l.constant);
            for p in &l.placements {
                let _ = writeln!(out, "place {} {} {}", p.block.0, p.offset, p.scale);
            }
        }
        out
    }
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Complex => "complex",
        Field::Real => "real",
    }
}

fn dump_term(out: &mut String, t: &Term) {
    let _ = writeln!(out, "term {}", t.block.0);
    dump_entries(out, &t.coeff);
}

fn dump_entries(out: &mut String, m: &CMat) {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let z = m[(i, j)];
            if z != Complex64::ZERO {
                let _ = writeln!(out, "{i} {j} {} {}", z.re, z.im);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Flattening into real coordinates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum CoordKind {
    Diag,
    /// Real part of an off-diagonal pair (also used for real blocks).
    Re,
    Im,
}

#[derive(Debug, Clone, Copy)]
struct Coord {
    p: usize,
    q: usize,
    kind: CoordKind,
}

impl Coord {
    /// Complex entries of the basis matrix this coordinate multiplies.
    fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        match self.kind {
            CoordKind::Diag => vec![(self.p, self.p, Complex64::ONE)],
            CoordKind::Re => vec![(self.p, self.q, Complex64::ONE), (self.q, self.p, Complex64::ONE)],
            CoordKind::Im => vec![(self.p, self.q, cplx(0.0, 1.0)), (self.q, self.p, cplx(0.0, -1.0))],
        }
    }
}

fn block_coords(b: &Block) -> Vec<Coord> {
    let mut out: Vec<Coord> = (0..b.size).map(|p| Coord { p, q: p, kind: CoordKind::Diag }).collect();
    for p in 0..b.size {
        for q in p + 1..b.size {
            out.push(Coord { p, q, kind: CoordKind::Re });
            if b.field == Field::Complex {
                out.push(Coord { p, q, kind: CoordKind::Im });
            }
        }
    }
    out
}

/// Sparse symmetric real matrix, both triangles stored.
type Entries = Vec<(usize, usize, f64)>;

/// Adds the real embedding of a complex entry to a cone of complex size `n`.
fn push_embedded(ents: &mut Entries, field: Field, n: usize, i: usize, j: usize, z: Complex64) {
    match field {
        Field::Real => {
            if z.re != 0.0 {
                ents.push((i, j, z.re));
            }
        }
        Field::Complex => {
            if z.re != 0.0 {
                ents.push((i, j, z.re));
                ents.push((i + n, j + n, z.re));
            }
            if z.im != 0.0 {
                ents.push((i + n, j, z.im));
                ents.push((i, j + n, -z.im));
            }
        }
    }
}

fn embed_dense(field: Field, m: &CMat) -> RMat {
    match field {
        Field::Real => m.map(|z| z.re),
        Field::Complex => crate::matrix::complex_to_real_embed(m),
    }
}

/// A barrier cone `F(z) = F0 + Σ_k z_k F_k ⪰ 0` in real symmetric form.
#[derive(Debug, Clone)]
struct Cone {
    size: usize,
    constant: RMat,
    /// `(coordinate, entries)` for every coordinate that touches this cone.
    terms: Vec<(usize, Entries)>,
    /// Participates in the uniform phase-I relaxation.
    relaxable: bool,
}

impl Cone {
    fn eval(&self, z: &DVector<f64>) -> RMat {
        let mut f = self.constant.clone();
        for (k, ents) in &self.terms {
            let zk = z[*k];
            if zk != 0.0 {
                for &(r, c, v) in ents {
                    f[(r, c)] += zk * v;
                }
            }
        }
        f
    }
}

/// The problem after flattening and equality elimination, in coordinates `z`
/// with `y = y_p + N z`.
#[derive(Debug, Clone)]
struct Reduced {
    cones: Vec<Cone>,
    cost: DVector<f64>,
    cost_offset: f64,
    particular: DVector<f64>,
    null_basis: DMatrix<f64>,
    equality_residual: f64,
}

struct Flat {
    /// (block, coordinate) pairs; global coordinate index is the position.
    coords: Vec<(usize, Coord)>,
    offsets: Vec<usize>,
}

impl Flat {
    fn new(p: &SdpProblem) -> Self {
        let mut coords = Vec::new();
        let mut offsets = Vec::new();
        for (j, b) in p.blocks.iter().enumerate() {
            offsets.push(coords.len());
            coords.extend(block_coords(b).into_iter().map(|c| (j, c)));
        }
        Self { coords, offsets }
    }

    fn len(&self) -> usize {
        self.coords.len()
    }

    /// Linear functional `Σ_j tr(A_j X_j)` as a dense coordinate vector.
    fn functional(&self, terms: &[Term]) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        for t in terms {
            let j = t.block.0;
            let end = self.offsets.get(j + 1).copied().unwrap_or(self.len());
            for k in self.offsets[j]..end {
                let coord = self.coords[k].1;
                let v: f64 = coord
                    .entries()
                    .iter()
                    .map(|&(r, c, z)| (t.coeff[(c, r)] * z).re)
                    .sum();
                out[k] += v;
            }
        }
        out
    }

    fn block_values(&self, p: &SdpProblem, y: &DVector<f64>) -> Vec<CMat> {
        let mut out: Vec<CMat> = p.blocks.iter().map(|b| CMat::zeros(b.size, b.size)).collect();
        for (k, (j, coord)) in self.coords.iter().enumerate() {
            for (r, c, z) in coord.entries() {
                out[*j][(r, c)] += z * y[k];
            }
        }
        out
    }

    /// Coordinates of block values (inverse of `block_values` on Hermitian input).
    fn coords_of(&self, p: &SdpProblem, values: &[CMat]) -> Result<DVector<f64>> {
        if values.len() != p.blocks.len() {
            return Err(Error::Dimension(format!(
                "start has {} blocks, problem has {}",
                values.len(),
                p.blocks.len()
            )));
        }
        for (v, b) in values.iter().zip(&p.blocks) {
            if v.nrows() != b.size || v.ncols() != b.size {
                return Err(Error::Dimension(format!("start value for block '{}' has wrong size", b.name)));
            }
        }
        Ok(DVector::from_iterator(
            self.len(),
            self.coords.iter().map(|(j, c)| {
                let z = values[*j][(c.p, c.q)];
                match c.kind {
                    CoordKind::Diag | CoordKind::Re => z.re,
                    CoordKind::Im => z.im,
                }
            }),
        ))
    }
}

fn build_cones(p: &SdpProblem, flat: &Flat) -> Vec<(RMat, Vec<Entries>, bool)> {
    // Each cone in original coordinates: constant + per-coordinate entries.
    let k_total = flat.len();
    let mut cones = Vec::new();

    for (j, b) in p.blocks.iter().enumerate() {
        let n_real = if b.field == Field::Complex { 2 * b.size } else { b.size };
        let mut per: Vec<Entries> = vec![Vec::new(); k_total];
        for (k, (bj, coord)) in flat.coords.iter().enumerate() {
            if *bj == j {
                for (r, c, z) in coord.entries() {
                    push_embedded(&mut per[k], b.field, b.size, r, c, z);
                }
            }
        }
        cones.push((RMat::zeros(n_real, n_real), per, true));
    }

    for lmi in &p.lmis {
        let n = lmi.constant.nrows();
        let constant = embed_dense(lmi.field, &lmi.constant);
        let mut per: Vec<Entries> = vec![Vec::new(); k_total];
        for pl in &lmi.placements {
            for (k, (bj, coord)) in flat.coords.iter().enumerate() {
                if *bj == pl.block.0 {
                    for (r, c, z) in coord.entries() {
                        push_embedded(&mut per[k], lmi.field, n, r + pl.offset, c + pl.offset, z * pl.scale);
                    }
                }
            }
        }
        cones.push((constant, per, true));
    }

    for c in &p.constraints {
        let a = flat.functional(&c.terms);
        let (sign, constant) = match c.sense {
            Sense::Le => (-1.0, c.rhs),
            Sense::Ge => (1.0, -c.rhs),
            Sense::Eq => continue,
        };
        let per: Vec<Entries> = a
            .iter()
            .map(|&v| if v != 0.0 { vec![(0, 0, sign * v)] } else { Vec::new() })
            .collect();
        cones.push((RMat::from_element(1, 1, constant), per, true));
    }
    cones
}

fn reduce(p: &SdpProblem) -> Result<(Flat, Reduced)> {
    p.validate()?;
    let flat = Flat::new(p);
    let k_total = flat.len();

    let eqs: Vec<&LinearConstraint> = p.constraints.iter().filter(|c| c.sense == Sense::Eq).collect();
    let (particular, null_basis, equality_residual) = if eqs.is_empty() {
        (DVector::zeros(k_total), DMatrix::identity(k_total, k_total), 0.0)
    } else {
        let mut a = DMatrix::zeros(eqs.len(), k_total);
        let mut b = DVector::zeros(eqs.len());
        for (i, c) in eqs.iter().enumerate() {
            a.set_row(i, &flat.functional(&c.terms).transpose());
            b[i] = c.rhs;
        }
        eliminate(&a, &b)?
    };

    let raw = build_cones(p, &flat);
    let dim = null_basis.ncols();
    let mut cones = Vec::with_capacity(raw.len());
    for (constant, per, relaxable) in raw {
        let size = constant.nrows();
        // constant absorbs the particular solution
        let mut f0 = constant;
        for (k, ents) in per.iter().enumerate() {
            let yk = particular[k];
            if yk != 0.0 {
                for &(r, c, v) in ents {
                    f0[(r, c)] += yk * v;
                }
            }
        }
        let terms = if eqs.is_empty() {
            per.into_iter().enumerate().filter(|(_, e)| !e.is_empty()).collect()
        } else {
            let mut terms = Vec::new();
            for col in 0..dim {
                let mut dense = RMat::zeros(size, size);
                for (k, ents) in per.iter().enumerate() {
                    let w = null_basis[(k, col)];
                    if w != 0.0 {
                        for &(r, c, v) in ents {
                            dense[(r, c)] += w * v;
                        }
                    }
                }
                let ents: Entries = dense
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > 1e-15)
                    .map(|(idx, &v)| (idx % size, idx / size, v))
                    .collect();
                if !ents.is_empty() {
                    terms.push((col, ents));
                }
            }
            terms
        };
        cones.push(Cone { size, constant: f0, terms, relaxable });
    }

    let cost_full = flat.functional(&p.objective);
    let cost = null_basis.transpose() * &cost_full;
    let cost_offset = cost_full.dot(&particular);
    Ok((flat, Reduced { cones, cost, cost_offset, particular, null_basis, equality_residual }))
}

/// Minimum-norm particular solution and orthonormal null-space basis of `A y = b`.
fn eliminate(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
    let k = a.ncols();
    // Eigen-decomposition of AᵀA yields both the row space and the null space.
    let ata = a.transpose() * a;
    let eig = ata.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    let mut null_cols = Vec::new();
    let mut pinv = DMatrix::zeros(k, k);
    for i in 0..k {
        let v = eig.eigenvectors.column(i);
        let lam = eig.eigenvalues[i];
        if lam > 1e-12 * scale {
            pinv += (v * v.transpose()) / lam;
        } else {
            null_cols.push(v.into_owned());
        }
    }
    let particular = &pinv * (a.transpose() * b);
    let residual = (a * &particular - b).amax();
    if residual > 1e-8 * (1.0 + b.amax()) {
        return Err(Error::Solver(format!("equality constraints are inconsistent (residual {residual:.3e})")));
    }
    let null_basis = if null_cols.is_empty() {
        DMatrix::zeros(k, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    Ok((particular, null_basis, residual))
}

// ---------------------------------------------------------------------------
// Barrier method
// ---------------------------------------------------------------------------

struct Barrier<'a> {
    cones: &'a [Cone],
    cost: &'a DVector<f64>,
    opts: &'a SdpOptions,
}

struct Evaluated {
    inverses: Vec<RMat>,
    log_det: f64,
}

enum CenterOutcome {
    Centered,
    Stopped,
    OutOfIterations,
}

fn cholesky_log_det(m: &RMat) -> Option<(f64, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut ld = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        ld += 2.0 * d.ln();
    }
    Some((ld, chol))
}

impl<'a> Barrier<'a> {
    fn evaluate(&self, z: &DVector<f64>) -> Option<Evaluated> {
        let mut inverses = Vec::with_capacity(self.cones.len());
        let mut log_det = 0.0;
        for cone in self.cones {
            let f = cone.eval(z);
            let (ld, chol) = cholesky_log_det(&f)?;
            log_det += ld;
            inverses.push(chol.inverse());
        }
        Some(Evaluated { inverses, log_det })
    }

    fn log_det_only(&self, z: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for cone in self.cones {
            total += cholesky_log_det(&cone.eval(z))?.0;
        }
        Some(total)
    }

    /// Newton centering at barrier weight `t`. `stop` is checked after every
    /// accepted step.
    fn center(
        &self,
        z: &mut DVector<f64>,
        t: f64,
        iters: &mut usize,
        stop: &mut dyn FnMut(&DVector<f64>) -> bool,
    ) -> Result<CenterOutcome> {
        let dim = z.len();
        if dim == 0 {
            return Ok(CenterOutcome::Centered);
        }
        let mut local = 0;
        loop {
            if local >= self.opts.max_iters {
                return Ok(CenterOutcome::OutOfIterations);
            }
            let ev = self
                .evaluate(z)
                .ok_or_else(|| Error::Solver("iterate left the interior".into()))?;
            let mut grad = self.cost * t;
            let mut hess = DMatrix::<f64>::zeros(dim, dim);
            for (cone, finv) in self.cones.iter().zip(&ev.inverses) {
                let n = cone.size;
                let fs = finv.as_slice();
                for (a, (k, ek)) in cone.terms.iter().enumerate() {
                    let mut g = 0.0;
                    for &(r, c, v) in ek {
                        g += v * fs[r * n + c];
                    }
                    grad[*k] -= g;
                    for (l, el) in &cone.terms[a..] {
                        let mut h = 0.0;
                        for &(r, c, v) in ek {
                            // column-major: finv[(c, p)] = fs[p·n + c]
                            let row_c = &fs[c * n..(c + 1) * n];
                            let row_r = &fs[r * n..(r + 1) * n];
                            let mut inner = 0.0;
                            for &(pp, qq, w) in el {
                                inner += w * row_c[pp] * row_r[qq];
                            }
                            h += v * inner;
                        }
                        hess[(*k, *l)] += h;
                        if k != l {
                            hess[(*l, *k)] += h;
                        }
                    }
                }
            }
            let step = solve_newton(&hess, &grad)?;
            let decrement_sq = -grad.dot(&step);
            let phi0 = t * self.cost.dot(z) - ev.log_det;
            // below the rounding level of phi the line search only sees noise
            let floor = 64.0 * f64::EPSILON * phi0.abs();
            if decrement_sq / 2.0 <= self.opts.newton_tol.max(floor) {
                return Ok(CenterOutcome::Centered);
            }
            // backtracking line search on the barrier objective
            let slope = grad.dot(&step);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &*z + &step * alpha;
                if let Some(ld) = self.log_det_only(&trial) {
                    let phi = t * self.cost.dot(&trial) - ld;
                    if phi <= phi0 + 0.01 * alpha * slope {
                        *z = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            *iters += 1;
            local += 1;
            if !accepted {
                // no progress possible at this precision
                return Ok(CenterOutcome::Centered);
            }
            if stop(z) {
                return Ok(CenterOutcome::Stopped);
            }
        }
    }
}

fn solve_newton(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(chol) = hess.clone().cholesky() {
        return Ok(-chol.solve(grad));
    }
    // Directions absent from every cone make the Hessian singular.
    let scale = (0..hess.nrows()).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let mut reg = hess.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += 1e-12 * scale;
    }
    reg.cholesky()
        .map(|c| -c.solve(grad))
        .ok_or_else(|| Error::Solver("Newton system is not positive definite".into()))
}

/// Path-following from a strictly feasible `z`. Returns the final gap and
/// whether the gap target was met.
fn follow_path(
    cones: &[Cone],
    cost: &DVector<f64>,
    opts: &SdpOptions,
    z: &mut DVector<f64>,
    iters: &mut usize,
    mut stop: impl FnMut(&DVector<f64>, f64, bool) -> bool,
) -> Result<(f64, SdpStatus, bool)> {
    let barrier = Barrier { cones, cost, opts };
    let degree: f64 = cones.iter().map(|c| c.size as f64).sum();
    let mut t = opts.initial_t;
    loop {
        let mut inner_stop = |zz: &DVector<f64>| stop(zz, degree / t, false);
        match barrier.center(z, t, iters, &mut inner_stop)? {
            CenterOutcome::Stopped => return Ok((degree / t, SdpStatus::Optimal, true)),
            CenterOutcome::OutOfIterations => return Ok((degree / t, SdpStatus::MaxIterations, false)),
            CenterOutcome::Centered => {}
        }
        let gap = degree / t;
        if stop(z, gap, true) {
            return Ok((gap, SdpStatus::Optimal, true));
        }
        if gap <= opts.gap_tol {
            return Ok((gap, SdpStatus::Optimal, false));
        }
        t /= opts.mu_factor;
    }
}

/// Phase-I cones: every relaxable cone gets `+ s·I`, plus the floor `s ≥ −1`.
fn phase_one_cones(cones: &[Cone], dim: usize) -> Vec<Cone> {
    let s = dim;
    let mut out: Vec<Cone> = cones
        .iter()
        .map(|c| {
            let mut c = c.clone();
            if c.relaxable {
                c.terms.push((s, (0..c.size).map(|i| (i, i, 1.0)).collect()));
            }
            c
        })
        .collect();
    out.push(Cone {
        size: 1,
        constant: RMat::from_element(1, 1, 1.0),
        terms: vec![(s, vec![(0, 0, 1.0)])],
        relaxable: false,
    });
    out
}

fn phase_one_start(cones: &[Cone], z: &DVector<f64>) -> f64 {
    let mut worst = 0.0f64;
    for c in cones {
        let f = c.eval(z);
        let lam = f.symmetric_eigen().eigenvalues.min();
        worst = worst.max(-lam);
    }
    worst + 1.0
}

struct PhaseOne {
    z: DVector<f64>,
    s: f64,
    gap: f64,
    status: SdpStatus,
    iterations: usize,
}

/// Minimizes the uniform relaxation `s`. `early` decides termination from
/// `(s, gap, centered)` after each Newton step; `gap` only bounds `s − s*`
/// when `centered` is set.
fn run_phase_one(
    red: &Reduced,
    opts: &SdpOptions,
    z0: DVector<f64>,
    mut early: impl FnMut(f64, f64, bool) -> bool,
) -> Result<PhaseOne> {
    let dim = red.null_basis.ncols();
    let cones = phase_one_cones(&red.cones, dim);
    let s0 = phase_one_start(&red.cones, &z0);
    let mut z = DVector::zeros(dim + 1);
    z.rows_mut(0, dim).copy_from(&z0);
    z[dim] = s0;
    let mut cost = DVector::zeros(dim + 1);
    cost[dim] = 1.0;
    let mut iterations = 0;
    if early(s0, f64::INFINITY, false) {
        return Ok(PhaseOne { z: z0, s: s0, gap: f64::INFINITY, status: SdpStatus::Optimal, iterations });
    }
    let (gap, status, _) = follow_path(&cones, &cost, opts, &mut z, &mut iterations, |zz, gap, centered| {
        early(zz[dim], gap, centered)
    })?;
    let s = z[dim];
    Ok(PhaseOne { z: z.rows(0, dim).into_owned(), s, gap, status, iterations })
}

fn solution_from(
    p: &SdpProblem,
    flat: &Flat,
    red: &Reduced,
    z: &DVector<f64>,
    status: SdpStatus,
    gap: f64,
    iterations: usize,
) -> SdpSolution {
    let y = &red.particular + &red.null_basis * z;
    let blocks = flat.block_values(p, &y);
    let objective = red.cost.dot(z) + red.cost_offset;
    let mut violation = red.equality_residual;
    for c in &red.cones {
        let lam = c.eval(z).symmetric_eigen().eigenvalues.min();
        violation = violation.max(-lam);
    }
    SdpSolution { status, blocks, objective, gap, max_violation: violation, iterations }
}

/// Solves `p`, finding a strictly feasible start with a phase-I problem.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, None, &SdpOptions::default())
}

/// Solves `p` from caller-supplied block values, which must be strictly
/// feasible for every cone and satisfy the equality constraints.
pub fn solve_from(p: &SdpProblem, start: &[CMat]) -> Result<SdpSolution> {
    solve_with(p, Some(start), &SdpOptions::default())
}

pub fn solve_with(p: &SdpProblem, start: Option<&[CMat]>, opts: &SdpOptions) -> Result<SdpSolution> {
    let (flat, red) = reduce(p)?;
    let mut iterations = 0;
    let mut z = match start {
        Some(values) => {
            let y = flat.coords_of(p, values)?;
            let z = red.null_basis.transpose() * (&y - &red.particular);
            let back = &red.particular + &red.null_basis * &z;
            if (&back - &y).amax() > 1e-8 * (1.0 + y.amax()) {
                return Err(Error::Solver("starting point violates the equality constraints".into()));
            }
            let interior = red.cones.iter().all(|c| cholesky_log_det(&c.eval(&z)).is_some());
            if !interior {
                return Err(Error::Solver("starting point is not strictly feasible".into()));
            }
            z
        }
        None => {
            let dim = red.null_basis.ncols();
            let phase = run_phase_one(&red, opts, DVector::zeros(dim), |s, gap, centered| {
                s < 0.0 || (centered && s - gap > 0.0)
            })?;
            iterations += phase.iterations;
            if phase.s >= 0.0 {
                let status = if phase.status == SdpStatus::MaxIterations {
                    SdpStatus::MaxIterations
                } else {
                    SdpStatus::Infeasible
                };
                return Ok(solution_from(p, &flat, &red, &phase.z, status, phase.gap, iterations));
            }
            phase.z
        }
    };
    if red.null_basis.ncols() == 0 {
        return Ok(solution_from(p, &flat, &red, &z, SdpStatus::Optimal, 0.0, iterations));
    }
    let mut phase_two = 0;
    let (gap, status, _) = follow_path(&red.cones, &red.cost, opts, &mut z, &mut phase_two, |_, _, _| false)?;
    iterations += phase_two;
    Ok(solution_from(p, &flat, &red, &z, status, gap, iterations))
}

/// Phase-I feasibility test; the objective of `p` is ignored.
pub fn check_feasibility(p: &SdpProblem, tol: f64) -> Result<Feasibility> {
    check_feasibility_with(p, tol, &SdpOptions::default())
}

pub fn check_feasibility_with(p: &SdpProblem, tol: f64, opts: &SdpOptions) -> Result<Feasibility> {
    let (flat, red) = reduce(p)?;
    let dim = red.null_basis.ncols();
    let phase = run_phase_one(&red, opts, DVector::zeros(dim), |s, gap, centered| {
        s <= 0.0 || (centered && s - gap > tol)
    })?;
    if phase.status == SdpStatus::MaxIterations && phase.s > tol && phase.s - phase.gap <= tol {
        return Err(Error::Solver(format!(
            "feasibility test hit the iteration cap undecided (s = {:.3e}, gap = {:.3e})",
            phase.s, phase.gap
        )));
    }
    let feasible = phase.s <= tol;
    let witness = feasible.then(|| {
        let y = &red.particular + &red.null_basis * &phase.z;
        flat.block_values(p, &y)
    });
    Ok(Feasibility { feasible, margin: phase.s, witness, iterations: phase.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{diag, frobenius_norm, identity, min_eigenvalue, trace_re};

    fn real1(v: f64) -> CMat {
        CMat::from_element(1, 1, cplx(v, 0.0))
    }

    #[test]
    fn scalar_trace_equality() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 1, Field::Real);
        p.set_objective(vec![Term::new(x, real1(1.0))]);
        p.add_constraint(vec![Term::new(x, real1(1.0))], Sense::Eq, 1.0);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.block(x)[(0, 0)].re - 1.0).abs() < 1e-9);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn smallest_eigenvalue_problem() {
        for field in [Field::Real, Field::Complex] {
            let mut p = SdpProblem::new();
            let x = p.add_block("x", 2, field);
            p.set_objective(vec![Term::new(x, diag(&[1.0, 2.0]))]);
            p.add_constraint(vec![Term::new(x, identity(2))], Sense::Eq, 1.0);
            let sol = solve(&p).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal);
            assert!((sol.objective - 1.0).abs() < 1e-6, "{}", sol.objective);
            let expected = diag(&[1.0, 0.0]);
            assert!(frobenius_norm(&(sol.block(x) - expected)) < 1e-6);
            assert!(sol.gap >= 0.0 && sol.gap <= 1e-6 * (1.0 + sol.objective.abs()));
        }
    }

    #[test]
    fn feasible_with_zero_witness() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, Field::Complex);
        p.add_constraint(vec![Term::new(x, identity(2))], Sense::Le, 1.0);
        let f = check_feasibility(&p, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!(f.feasible);
        let w = &f.witness.unwrap()[0];
        assert!(min_eigenvalue(w).unwrap() >= -1e-12);
        assert!(trace_re(w) <= 1.0 + 1e-12);
    }

    #[test]
    fn contradictory_traces_infeasible() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, Field::Complex);
        p.add_constraint(vec![Term::new(x, identity(2))], Sense::Le, 1.0);
        p.add_constraint(vec![Term::new(x, identity(2))], Sense::Ge, 2.0);
        let f = check_feasibility(&p, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!(!f.feasible);
        assert!(f.witness.is_none());
        assert!(f.margin > 0.1);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, Field::Real);
        p.set_objective(vec![Term::new(x, identity(3))]);
        assert!(matches!(solve(&p), Err(Error::Dimension(_))));
    }

    #[test]
    fn complex_block_in_real_lmi_rejected() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, Field::Complex);
        p.add_lmi("l", Field::Real, identity(2), vec![Placement { block: x, offset: 0, scale: 1.0 }]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn repeated_solve_is_bitwise_identical() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 3, Field::Complex);
        let mut c = diag(&[1.0, 2.0, 3.0]);
        c[(0, 1)] = cplx(0.3, 0.2);
        c[(1, 0)] = cplx(0.3, -0.2);
        p.set_objective(vec![Term::new(x, c)]);
        p.add_constraint(vec![Term::new(x, identity(3))], Sense::Eq, 2.0);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.blocks, b.blocks);
    }

    #[test]
    fn lmi_schur_complement_inverse() {
        // min tr(D) s.t. [[S, I], [I, D]] ⪰ 0  =>  D = S⁻¹
        let s = CMat::from_row_slice(2, 2, &[cplx(2.0, 0.0), cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(1.0, 0.0)]);
        let mut constant = CMat::zeros(4, 4);
        constant.view_mut((0, 0), (2, 2)).copy_from(&s);
        for i in 0..2 {
            constant[(i, i + 2)] = Complex64::ONE;
            constant[(i + 2, i)] = Complex64::ONE;
        }
        let mut p = SdpProblem::new();
        let d = p.add_block("D", 2, Field::Complex);
        p.set_objective(vec![Term::new(d, identity(2))]);
        p.add_lmi("schur", Field::Complex, constant, vec![Placement { block: d, offset: 2, scale: 1.0 }]);
        let sol = solve_from(&p, &[identity(2).scale(10.0)]).unwrap();
        let inv = crate::matrix::pd_inverse(&s).unwrap();
        assert!(frobenius_norm(&(sol.block(d) - &inv)) < 1e-6);
        assert!(sol.max_violation <= 1e-7);
    }

    #[test]
    fn infeasible_start_rejected() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 1, Field::Real);
        p.set_objective(vec![Term::new(x, real1(1.0))]);
        assert!(solve_from(&p, &[real1(-1.0)]).is_err());
    }

    #[test]
    fn dump_lists_sections() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, Field::Complex);
        p.set_objective(vec![Term::new(x, identity(2))]);
        p.add_constraint(vec![Term::new(x, identity(2))], Sense::Le, 3.0);
        let text = p.dump();
        let heads: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
        assert_eq!(heads, ["[blocks]", "[objective]", "[constraints]", "[lmis]"]);
        assert!(text.contains("0 x 2 complex"));
        assert!(text.contains("constraint 0 le 3"));
    }
}
