use num_traits::Signed;
use sha2::{Digest, Sha256};

use super::expr::{Expr, Symbol};
use super::normal::{normalize, rational_content, term_factors, term_parts};

/// Divide a normalized equation `e = 0` by its rational content and by the
/// largest common power of each of `factors` (assumed nonzero), then fix the
/// sign so the leading term has a positive coefficient.
pub fn strip_content(e: &Expr, factors: &[Symbol]) -> Expr {
    let mut n = normalize(e);
    if n.is_zero_literal() {
        return n;
    }
    for f in factors {
        let fe = Expr::symbol(f);
        let exponents: Option<Vec<i64>> = n
            .terms()
            .iter()
            .map(|term| term_factors(term).into_iter().find(|(b, _)| *b == fe).map_or(Some(0), |(_, x)| x.as_integer()))
            .collect();
        let min = exponents.and_then(|ks| ks.into_iter().min());
        if let Some(m) = min.filter(|&m| m != 0) {
            n = normalize(&(n * fe.powi(-m)));
        }
    }
    let coefs: Vec<_> = n.terms().iter().map(|t| term_parts(t).0).collect();
    let mut content = rational_content(&coefs);
    if coefs[0].is_negative() {
        content = -content;
    }
    normalize(&(n / Expr::num(content)))
}

/// Canonical form of an equation `e = 0`: content in r, D and Gamma removed
/// and the sign normalized.
pub fn canonical_equation(e: &Expr) -> Expr {
    strip_content(e, &[Symbol::new("r"), Symbol::new("D"), Symbol::new("Gamma")])
}

/// SHA-256 of the printed canonical form, as lowercase hex.
pub fn canonical_hash(e: &Expr) -> String {
    let mut h = Sha256::new();
    h.update(normalize(e).to_string().as_bytes());
    hex_string(&h.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_common_factors_and_sign() {
        let (r, d) = (Expr::sym("r"), Expr::sym("D"));
        let e = Expr::int(-6) * &r * &d * Expr::sym("a4") + Expr::int(4) * r.powi(2) * &d * Expr::sym("a2");
        let c = canonical_equation(&e);
        let expected = normalize(&(Expr::int(2) * &r * Expr::sym("a2") - Expr::int(3) * Expr::sym("a4")));
        assert!(c == expected || c == normalize(&-expected.clone()));
        assert_eq!(canonical_equation(&c), c);
        assert_eq!(canonical_equation(&(-&c)), c);
    }

    #[test]
    fn hash_is_stable() {
        let e = Expr::sym("a1") + Expr::sym("a2");
        assert_eq!(canonical_hash(&e), canonical_hash(&(Expr::sym("a2") + Expr::sym("a1"))));
        assert_eq!(canonical_hash(&e).len(), 64);
    }
}
