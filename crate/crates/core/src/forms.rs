//! Differential forms over (t, r, phi, w) and the field differentials dD, dGamma.
//!
//! A form is a map from canonically ordered wedge bases to coefficients. The
//! basis order is t < r < phi < w, followed by field differentials by name, so
//! `dt^dr` is canonical and `dr^dt` is stored as `-dt^dr`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::kernel::sampling::{random_expr, ExprShape};
use crate::kernel::{normalize, partial, Expr, KernelError, Symbol, SymbolTable, COORDINATES};

/// Highest degree that fits the four manifold coordinates.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("geometry index must be 0, 1 or 2, got {0}")]
    InvalidGeometry(i64),
    #[error("section map has a dependency cycle through d{0}")]
    SectionCycle(String),
    #[error("d{0} has no expansion onto dr, dt")]
    NonBaseDependency(String),
    #[error("cannot annul: component {basis} = {coefficient} is not on dt^dr")]
    NotAnnullable { basis: String, coefficient: String },
    #[error("annul expects a 2-form, got degree {0}")]
    WrongDegree(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// The differential `d<name>` of a coordinate or field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Differential(pub Symbol);

impl Differential {
    pub fn of(name: &str) -> Self {
        Differential(Symbol::new(name))
    }

    fn rank(&self) -> (usize, &str) {
        let name = self.0.name();
        match COORDINATES.iter().position(|c| *c == name) {
            Some(i) => (i, name),
            None => (COORDINATES.len(), name),
        }
    }
}

impl Ord for Differential {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Differential {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// Strictly increasing wedge product of differentials; empty for 0-forms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis(Vec<Differential>);

impl Basis {
    pub fn scalar() -> Self {
        Basis(Vec::new())
    }

    /// Canonical basis for the given differentials and the sign of the
    /// reordering; `None` if a differential repeats.
    pub fn canonical(names: &[&str]) -> Option<(Basis, i64)> {
        Self::sorted(names.iter().map(|n| Differential::of(n)).collect())
    }

    fn sorted(mut ds: Vec<Differential>) -> Option<(Basis, i64)> {
        let mut sign = 1;
        // insertion sort, counting transpositions
        for i in 1..ds.len() {
            let mut j = i;
            while j > 0 && ds[j - 1] > ds[j] {
                ds.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if ds.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((Basis(ds), sign))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn differentials(&self) -> &[Differential] {
        &self.0
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|d| d.0.name().to_string()).collect()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("^"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialForm {
    degree: usize,
    terms: BTreeMap<Basis, Expr>,
    overflow: bool,
}

impl DifferentialForm {
    pub fn zero(degree: usize) -> Self {
        DifferentialForm { degree, terms: BTreeMap::new(), overflow: false }
    }

    pub fn scalar(f: Expr) -> Self {
        let mut out = Self::zero(0);
        out.add_term(Basis::scalar(), f);
        out
    }

    /// `d<name>` as a unit 1-form.
    pub fn d(name: &str) -> Self {
        Self::term(Expr::one(), &[name])
    }

    /// `coef * d<names[0]> ^ d<names[1]> ^ ...` in any order.
    pub fn term(coef: Expr, names: &[&str]) -> Self {
        let mut out = Self::zero(names.len());
        if let Some((basis, sign)) = Basis::canonical(names) {
            out.add_term(basis, coef * sign);
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Set when a wedge would have exceeded [`MAX_DEGREE`].
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Basis, &Expr)> {
        self.terms.iter()
    }

    /// Coefficient on the wedge of `names`, with the reordering sign applied.
    pub fn coefficient(&self, names: &[&str]) -> Expr {
        match Basis::canonical(names) {
            Some((b, sign)) => self.terms.get(&b).map_or_else(Expr::zero, |c| normalize(&(c * sign))),
            None => Expr::zero(),
        }
    }

    fn add_term(&mut self, basis: Basis, coef: Expr) {
        debug_assert_eq!(basis.degree(), self.degree);
        let sum = match self.terms.remove(&basis) {
            Some(old) => normalize(&(old + coef)),
            None => normalize(&coef),
        };
        if !sum.is_zero_literal() {
            self.terms.insert(basis, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        out.overflow |= other.overflow;
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, f: &Expr) -> Self {
        let mut out = Self::zero(self.degree);
        out.overflow = self.overflow;
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c * f);
        }
        out
    }

    /// Apply `op` to every coefficient.
    pub fn map_coefficients(
        &self,
        mut op: impl FnMut(&Expr) -> Result<Expr, KernelError>,
    ) -> Result<Self, KernelError> {
        let mut out = Self::zero(self.degree);
        out.overflow = self.overflow;
        for (b, c) in &self.terms {
            out.add_term(b.clone(), op(c)?);
        }
        Ok(out)
    }

    /// Differentials that occur in any basis element.
    pub fn differentials(&self) -> BTreeSet<Differential> {
        self.terms.keys().flat_map(|b| b.0.iter().cloned()).collect()
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c}) {b}")?;
        }
        Ok(())
    }
}

/// Graded wedge product. Exceeding [`MAX_DEGREE`] yields the zero form of
/// degree `MAX_DEGREE` with the overflow flag set.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> DifferentialForm {
    let degree = a.degree + b.degree;
    if degree > MAX_DEGREE {
        let mut out = DifferentialForm::zero(MAX_DEGREE);
        out.overflow = true;
        return out;
    }
    let mut out = DifferentialForm::zero(degree);
    out.overflow = a.overflow || b.overflow;
    for (ba, ca) in &a.terms {
        for (bb, cb) in &b.terms {
            let joined: Vec<Differential> = ba.0.iter().chain(bb.0.iter()).cloned().collect();
            if let Some((basis, sign)) = Basis::sorted(joined) {
                out.add_term(basis, ca * cb * sign);
            }
        }
    }
    out
}

/// Exterior derivative. For a 0-form, `df = sum_q (∂f/∂q) dq` over t, r, phi, w,
/// where fields contribute jets through the r and t partials.
pub fn exterior_d(a: &DifferentialForm, table: &SymbolTable) -> Result<DifferentialForm, KernelError> {
    let mut out = DifferentialForm::zero((a.degree + 1).min(MAX_DEGREE));
    if a.degree + 1 > MAX_DEGREE {
        out.overflow = true;
        return Ok(out);
    }
    for (basis, c) in &a.terms {
        let df = d_scalar(c, table)?;
        let tail = DifferentialForm {
            degree: basis.degree(),
            terms: BTreeMap::from([(basis.clone(), Expr::one())]),
            overflow: false,
        };
        out = out.add(&wedge(&df, &tail));
    }
    Ok(out)
}

/// `df` of a scalar.
pub fn d_scalar(f: &Expr, table: &SymbolTable) -> Result<DifferentialForm, KernelError> {
    let mut out = DifferentialForm::zero(1);
    for q in COORDINATES {
        let dq = partial(f, &Symbol::new(q), table)?;
        out = out.add(&DifferentialForm::term(dq, &[q]));
    }
    Ok(out)
}

/// Geometry index: symbolic `n` or a literal 0, 1, 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Symbolic,
    Literal(u8),
}

impl Geometry {
    pub fn literal(n: i64) -> Result<Self, FormError> {
        match n {
            0..=2 => Ok(Geometry::Literal(n as u8)),
            _ => Err(FormError::InvalidGeometry(n)),
        }
    }

    pub fn n(&self) -> Expr {
        match self {
            Geometry::Symbolic => Expr::sym("n"),
            Geometry::Literal(k) => Expr::int(*k as i64),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Geometry::Symbolic => "symbolic".into(),
            Geometry::Literal(k) => k.to_string(),
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = FormError;
    fn from_str(s: &str) -> Result<Self, FormError> {
        if s == "symbolic" || s == "n" {
            return Ok(Geometry::Symbolic);
        }
        s.parse::<i64>().map_err(|_| FormError::InvalidGeometry(-1)).and_then(Geometry::literal)
    }
}

fn s(name: &str) -> Expr {
    Expr::sym(name)
}

/// First-order diffusion form. The production term carries `-Gamma*phi dt^dr`
/// so that annulling gives `-phi_t/v + ... + Gamma*phi`.
pub fn build_mu1(geom: Geometry) -> DifferentialForm {
    mu1_with_gamma_sign(geom, -1)
}

/// The diffusion form with the production term as `+Gamma*phi dt^dr`.
pub fn build_mu1_printed(geom: Geometry) -> DifferentialForm {
    mu1_with_gamma_sign(geom, 1)
}

fn mu1_with_gamma_sign(geom: Geometry, sign: i64) -> DifferentialForm {
    let n = geom.n();
    DifferentialForm::term(s("v").recip(), &["phi", "r"])
        .add(&DifferentialForm::term(&n * s("r").recip() * s("D"), &["phi", "t"]))
        .add(&DifferentialForm::term(s("D_r"), &["phi", "t"]))
        .add(&DifferentialForm::term(s("D"), &["w", "t"]))
        .add(&DifferentialForm::term(s("Gamma") * s("phi") * sign, &["t", "r"]))
}

/// `r * mu1`, free of the 1/r singularity.
pub fn build_r_mu1(geom: Geometry) -> DifferentialForm {
    build_mu1(geom).scale(&s("r"))
}

pub fn build_mu2() -> DifferentialForm {
    DifferentialForm::term(s("w"), &["t", "r"]).add(&DifferentialForm::d("phi").wedge_with(&DifferentialForm::d("t")))
}

/// Closure form `D_r dr^dt - dD^dt` with dD kept as its own differential.
pub fn build_mu3() -> DifferentialForm {
    DifferentialForm::term(s("D_r"), &["r", "t"]).sub(&DifferentialForm::term(Expr::one(), &["D", "t"]))
}

/// `mu3` with dD expanded by the exterior derivative of D; identically zero.
pub fn build_mu3_expanded(table: &SymbolTable) -> Result<DifferentialForm, KernelError> {
    let dd = exterior_d(&DifferentialForm::scalar(s("D")), table)?;
    Ok(DifferentialForm::term(s("D_r"), &["r", "t"]).sub(&wedge(&dd, &DifferentialForm::d("t"))))
}

impl DifferentialForm {
    pub fn wedge_with(&self, other: &Self) -> Self {
        wedge(self, other)
    }
}

/// Expansion of differentials of dependent quantities onto other differentials.
#[derive(Clone, Debug, Default)]
pub struct SectionMap {
    images: BTreeMap<Symbol, DifferentialForm>,
}

impl SectionMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// phi, w, D and Gamma as functions of (r, t), with fresh jets.
    pub fn standard(table: &SymbolTable) -> Result<Self, KernelError> {
        let mut m = Self::empty();
        for v in ["phi", "w", "D", "Gamma"] {
            let sym = Symbol::new(v);
            let jr = table.jet(&sym, 1, 0)?;
            let jt = table.jet(&sym, 0, 1)?;
            m.set(
                v,
                DifferentialForm::term(Expr::symbol(&jr), &["r"])
                    .add(&DifferentialForm::term(Expr::symbol(&jt), &["t"])),
            );
        }
        Ok(m)
    }

    pub fn set(&mut self, name: &str, image: DifferentialForm) {
        assert_eq!(image.degree(), 1, "section images are 1-forms");
        self.images.insert(Symbol::new(name), image);
    }

    fn resolve(&self, d: &Differential, stack: &mut Vec<Symbol>) -> Result<DifferentialForm, FormError> {
        let name = d.0.name();
        if name == "r" || name == "t" {
            return Ok(DifferentialForm::d(name));
        }
        let Some(image) = self.images.get(&d.0) else {
            return Err(FormError::NonBaseDependency(name.to_string()));
        };
        if stack.contains(&d.0) {
            return Err(FormError::SectionCycle(name.to_string()));
        }
        stack.push(d.0.clone());
        let mut out = DifferentialForm::zero(1);
        for (b, c) in &image.terms {
            let inner = self.resolve(&b.0[0], stack)?;
            out = out.add(&inner.scale(c));
        }
        stack.pop();
        Ok(out)
    }
}

/// Replace every non-base differential by its expansion; the result lives on dt, dr.
pub fn section(a: &DifferentialForm, map: &SectionMap) -> Result<DifferentialForm, FormError> {
    let mut out = DifferentialForm::zero(a.degree);
    for (basis, c) in &a.terms {
        let mut acc = DifferentialForm::scalar(c.clone());
        for d in &basis.0 {
            acc = wedge(&acc, &map.resolve(d, &mut Vec::new())?);
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// The dt^dr coefficient of a sectioned 2-form, signed so that the phi_t
/// coefficient is negative.
pub fn annul(a: &DifferentialForm) -> Result<Expr, FormError> {
    if a.degree != 2 {
        return Err(FormError::WrongDegree(a.degree));
    }
    let (dtdr, _) = Basis::canonical(&["t", "r"]).expect("distinct");
    for (b, c) in &a.terms {
        if *b != dtdr {
            return Err(FormError::NotAnnullable { basis: b.to_string(), coefficient: c.to_string() });
        }
    }
    let c = a.terms.get(&dtdr).cloned().unwrap_or_else(Expr::zero);
    let phi_t = Symbol::new("phi_t");
    if let Some(groups) = crate::kernel::collect_by_symbols(&c, &[phi_t]) {
        if let Some(k) = groups.get(&vec![1]) {
            let lead = k.terms().first().map(|t| crate::kernel::term_parts(t).0);
            if lead.is_some_and(|q| q > num_traits::Zero::zero()) {
                return Ok(normalize(&-c));
            }
        }
    }
    Ok(c)
}

/// Random form of the given degree over t, r, phi, w (and optionally dD),
/// with coefficients in coordinates, parameters and fields.
pub fn random_form(degree: usize, with_fields: bool, rng: &mut impl Rng) -> DifferentialForm {
    let mut names: Vec<&str> = COORDINATES.to_vec();
    if with_fields {
        names.push("D");
    }
    let shape = ExprShape::polynomial(&["t", "r", "phi", "w", "a1", "a2", "D", "Gamma", "D_r"], 2);
    let mut out = DifferentialForm::zero(degree);
    for _ in 0..rng.gen_range(1..=3) {
        let mut picked: Vec<&str> = Vec::new();
        while picked.len() < degree {
            let n = names[rng.gen_range(0..names.len())];
            if !picked.contains(&n) {
                picked.push(n);
            }
        }
        out = out.add(&DifferentialForm::term(random_expr(&shape, rng), &picked));
    }
    out
}
