use std::collections::BTreeMap;
use std::sync::RwLock;

use super::expr::{Expr, Symbol};
use super::KernelError;

/// The four manifold coordinates, in the fixed exterior-algebra order.
pub const COORDINATES: [&str; 4] = ["t", "r", "phi", "w"];

/// Built-in elementary functions known to differentiation and evaluation.
pub const BUILTINS: [&str; 4] = ["exp", "ln", "sin", "cos"];

/// Independent variables of every dependent function (fields and jets).
pub const BASE_VARIABLES: [&str; 2] = ["r", "t"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Coordinate,
    Parameter,
    /// Named numeric constant (`pi`).
    NamedConstant,
    /// Dependent material function of (r, t) written without arguments (D, Gamma).
    Field,
    /// Partial derivative of a field or dependent coordinate: `r_order` r-derivatives
    /// and `t_order` t-derivatives of `base`.
    Jet {
        base: Symbol,
        r_order: u32,
        t_order: u32,
    },
    /// Arbitrary function of its arguments; `derivative_of` links `G'` back to `G`.
    ArbitraryFunction {
        arity: usize,
        derivative_of: Option<(Symbol, usize)>,
    },
    ArbitraryConstant,
    Builtin {
        arity: usize,
    },
}

impl SymbolKind {
    pub fn label(&self) -> &'static str {
        match self {
            SymbolKind::Coordinate => "coordinate",
            SymbolKind::Parameter => "parameter",
            SymbolKind::NamedConstant => "named-constant",
            SymbolKind::Field => "field",
            SymbolKind::Jet { .. } => "jet",
            SymbolKind::ArbitraryFunction { .. } => "arbitrary-function",
            SymbolKind::ArbitraryConstant => "arbitrary-constant",
            SymbolKind::Builtin { .. } => "builtin",
        }
    }

    pub fn is_function(&self) -> bool {
        matches!(self, SymbolKind::ArbitraryFunction { .. } | SymbolKind::Builtin { .. })
    }
}

/// Append-only registry of symbol kinds, safe to share between threads.
#[derive(Debug, Default)]
pub struct SymbolTable {
    entries: RwLock<BTreeMap<Symbol, SymbolKind>>,
    annotations: RwLock<BTreeMap<Symbol, Expr>>,
}

impl SymbolTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding every symbol of the diffusion model.
    pub fn standard() -> Self {
        let table = Self::empty();
        for c in COORDINATES {
            table.insert(c, SymbolKind::Coordinate);
        }
        for i in 1..=8 {
            table.insert(&format!("a{i}"), SymbolKind::Parameter);
        }
        for p in ["v", "n", "eps", "nubar", "Sigma_f", "Sigma_a"] {
            table.insert(p, SymbolKind::Parameter);
        }
        table.insert("pi", SymbolKind::NamedConstant);
        table.insert("D", SymbolKind::Field);
        table.insert("Gamma", SymbolKind::Field);
        table.insert("C", SymbolKind::ArbitraryConstant);
        for f in ["G", "F"] {
            table.insert(f, SymbolKind::ArbitraryFunction { arity: 1, derivative_of: None });
        }
        for b in BUILTINS {
            table.insert(b, SymbolKind::Builtin { arity: 1 });
        }
        for base in ["D", "Gamma"] {
            for (r, t) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                table.jet(&Symbol::new(base), r, t).expect("field registered above");
            }
        }
        table.annotate("Gamma", Expr::sym("nubar") * Expr::sym("Sigma_f") - Expr::sym("Sigma_a"));
        table
    }

    fn insert(&self, name: &str, kind: SymbolKind) {
        self.entries.write().unwrap().insert(Symbol::new(name), kind);
    }

    pub fn kind(&self, s: &Symbol) -> Option<SymbolKind> {
        self.entries.read().unwrap().get(s).cloned()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.entries.read().unwrap().contains_key(s)
    }

    pub fn symbols(&self) -> Vec<(Symbol, SymbolKind)> {
        self.entries.read().unwrap().iter().map(|(s, k)| (s.clone(), k.clone())).collect()
    }

    /// Register a symbol; re-registration must agree with the existing kind.
    pub fn declare(&self, name: &str, kind: SymbolKind) -> Result<Symbol, KernelError> {
        let sym = Symbol::new(name);
        let mut entries = self.entries.write().unwrap();
        match entries.get(&sym) {
            Some(existing) if *existing == kind => Ok(sym),
            Some(existing) => match (existing, &kind) {
                (SymbolKind::ArbitraryFunction { arity: a, .. }, SymbolKind::ArbitraryFunction { arity: b, .. })
                    if a != b =>
                {
                    Err(KernelError::ArityMismatch { name: name.to_string(), expected: *a, found: *b })
                }
                _ => Err(KernelError::KindConflict { name: name.to_string(), existing: existing.label() }),
            },
            None => {
                entries.insert(sym.clone(), kind);
                Ok(sym)
            }
        }
    }

    pub fn annotate(&self, name: &str, value: Expr) {
        self.annotations.write().unwrap().insert(Symbol::new(name), value);
    }

    /// Optional decomposition attached to a symbol (Gamma = nubar*Sigma_f - Sigma_a).
    pub fn annotation(&self, s: &Symbol) -> Option<Expr> {
        self.annotations.read().unwrap().get(s).cloned()
    }

    /// The jet symbol for `r_order` r- and `t_order` t-derivatives of `base`,
    /// registering it on first use. `base` may itself be a jet.
    pub fn jet(&self, base: &Symbol, r_order: u32, t_order: u32) -> Result<Symbol, KernelError> {
        let (root, r0, t0) = match self.kind(base) {
            Some(SymbolKind::Jet { base, r_order, t_order }) => (base, r_order, t_order),
            Some(SymbolKind::Field) | Some(SymbolKind::Coordinate) => (base.clone(), 0, 0),
            Some(other) => {
                return Err(KernelError::KindConflict { name: base.name().to_string(), existing: other.label() })
            }
            None => return Err(KernelError::UnknownSymbol(base.name().to_string())),
        };
        let (r, t) = (r0 + r_order, t0 + t_order);
        if r + t == 0 {
            return Ok(root);
        }
        let name = format!("{}_{}{}", root.name(), "r".repeat(r as usize), "t".repeat(t as usize));
        self.declare(&name, SymbolKind::Jet { base: root, r_order: r, t_order: t })
    }

    /// Derivative function symbol of an arbitrary function with respect to argument `index`.
    pub fn function_derivative(&self, f: &Symbol, index: usize) -> Result<Symbol, KernelError> {
        let arity = match self.kind(f) {
            Some(SymbolKind::ArbitraryFunction { arity, .. }) => arity,
            Some(other) => {
                return Err(KernelError::KindConflict { name: f.name().to_string(), existing: other.label() })
            }
            None => return Err(KernelError::UnknownSymbol(f.name().to_string())),
        };
        if index >= arity {
            return Err(KernelError::ArityMismatch { name: f.name().to_string(), expected: arity, found: index + 1 });
        }
        let name = if arity == 1 { format!("{}'", f.name()) } else { format!("{}'{}", f.name(), index + 1) };
        self.declare(&name, SymbolKind::ArbitraryFunction { arity, derivative_of: Some((f.clone(), index)) })
    }

    /// Resolve an identifier written in jet notation (`D_rt`, `Gamma_t`, `phi_r`),
    /// registering it when the base is a field or a dependent coordinate.
    pub fn resolve_jet_name(&self, name: &str) -> Option<Symbol> {
        let (base, idx) = name.rsplit_once('_')?;
        if idx.is_empty() || !idx.chars().all(|c| c == 'r' || c == 't') {
            return None;
        }
        let base_sym = Symbol::new(base);
        match self.kind(&base_sym)? {
            SymbolKind::Field => {}
            SymbolKind::Coordinate if base == "phi" || base == "w" => {}
            _ => return None,
        }
        let r = idx.chars().filter(|&c| c == 'r').count() as u32;
        let t = idx.chars().filter(|&c| c == 't').count() as u32;
        let canonical = self.jet(&base_sym, r, t).ok()?;
        (canonical.name() == name).then_some(canonical)
    }

    pub fn is_coordinate(&self, s: &Symbol) -> bool {
        matches!(self.kind(s), Some(SymbolKind::Coordinate))
    }

    /// True for symbols that vary with r or t: coordinates r, t, fields and jets.
    pub fn depends_on_base(&self, s: &Symbol) -> bool {
        match self.kind(s) {
            Some(SymbolKind::Coordinate) => BASE_VARIABLES.contains(&s.name()),
            Some(SymbolKind::Field) | Some(SymbolKind::Jet { .. }) => true,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jets_have_registered_bases_and_canonical_names() {
        let table = SymbolTable::standard();
        let d = Symbol::new("D");
        let d_r = table.jet(&d, 1, 0).unwrap();
        assert_eq!(d_r.name(), "D_r");
        let d_rt = table.jet(&d_r, 0, 1).unwrap();
        assert_eq!(d_rt.name(), "D_rt");
        match table.kind(&d_rt).unwrap() {
            SymbolKind::Jet { base, r_order, t_order } => {
                assert_eq!(base, d);
                assert_eq!((r_order, t_order), (1, 1));
            }
            k => panic!("unexpected kind {k:?}"),
        }
        for (s, k) in table.symbols() {
            if let SymbolKind::Jet { base, r_order, t_order } = k {
                assert!(table.contains(&base), "{s} has unregistered base");
                assert!(r_order + t_order > 0);
            }
        }
    }

    #[test]
    fn coordinate_set_is_fixed() {
        let table = SymbolTable::standard();
        let coords: Vec<_> = table
            .symbols()
            .into_iter()
            .filter(|(_, k)| *k == SymbolKind::Coordinate)
            .map(|(s, _)| s.name().to_string())
            .collect();
        let mut expected: Vec<_> = COORDINATES.iter().map(|s| s.to_string()).collect();
        expected.sort();
        assert_eq!(coords, expected);
    }

    #[test]
    fn function_arity_is_fixed() {
        let table = SymbolTable::standard();
        let err = table.declare("G", SymbolKind::ArbitraryFunction { arity: 2, derivative_of: None }).unwrap_err();
        assert!(matches!(err, KernelError::ArityMismatch { expected: 1, found: 2, .. }));
    }

    #[test]
    fn jet_names_resolve() {
        let table = SymbolTable::standard();
        assert_eq!(table.resolve_jet_name("Gamma_rt").unwrap().name(), "Gamma_rt");
        assert_eq!(table.resolve_jet_name("phi_t").unwrap().name(), "phi_t");
        assert!(table.resolve_jet_name("D_tr").is_none());
        assert!(table.resolve_jet_name("a1_r").is_none());
    }
}
