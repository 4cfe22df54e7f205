//! Constraint semirings and signal domains.
//!
//! Every algorithm in the crate is generic over these traits: the verdict
//! domain of the monitor is a [`SignalDomain`], distances are accumulated in a
//! [`Semiring`] (the tropical one for the stock distance functions).

use std::fmt::Debug;

use crate::logic::CmpOp;

/// A constraint semiring `<A, choose, combine, bottom, top>`.
///
/// `choose` is associative, commutative and idempotent with identity
/// [`Semiring::bottom`] and annihilator [`Semiring::top`]; `combine` is
/// associative and commutative with identity `top` and annihilator `bottom`.
pub trait Semiring {
    type Value: Copy + PartialEq + Debug + Send + Sync + 'static;

    const NAME: &'static str;
    const IDEMPOTENT: bool;
    const TOTAL: bool;

    fn choose(a: Self::Value, b: Self::Value) -> Self::Value;
    fn combine(a: Self::Value, b: Self::Value) -> Self::Value;
    fn bottom() -> Self::Value;
    fn top() -> Self::Value;

    /// Derived order: `a ⊑ b` iff `a ⊕ b = b`.
    fn leq(a: Self::Value, b: Self::Value) -> bool {
        Self::choose(a, b) == b
    }

    /// `true` when `choose` picks `a` over `b` or the two are equal.
    fn prefers(a: Self::Value, b: Self::Value) -> bool {
        Self::leq(b, a)
    }
}

/// An idempotent semiring equipped with an involutive negation that swaps
/// `choose` and `combine` (De Morgan).
pub trait SignalDomain: Semiring {
    fn negate(a: Self::Value) -> Self::Value;

    /// Embeds a crisp truth value as `top` / `bottom`.
    fn from_bool(b: bool) -> Self::Value {
        if b {
            Self::top()
        } else {
            Self::bottom()
        }
    }

    /// Interpretation of the comparison `lhs op rhs` between a real channel
    /// value and a threshold.
    fn from_comparison(lhs: f64, op: CmpOp, rhs: f64) -> Self::Value;
}

/// Left fold of `choose` starting from `bottom`; the empty collection yields
/// `bottom`.
pub fn choose_all<S: Semiring>(values: impl IntoIterator<Item = S::Value>) -> S::Value {
    values.into_iter().fold(S::bottom(), S::choose)
}

/// Left fold of `combine` starting from `top`.
pub fn combine_all<S: Semiring>(values: impl IntoIterator<Item = S::Value>) -> S::Value {
    values.into_iter().fold(S::top(), S::combine)
}

/// `<{true, false}, or, and, not>`: qualitative semantics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BooleanDomain;

impl Semiring for BooleanDomain {
    type Value = bool;
    const NAME: &'static str = "boolean";
    const IDEMPOTENT: bool = true;
    const TOTAL: bool = true;

    fn choose(a: bool, b: bool) -> bool {
        a || b
    }
    fn combine(a: bool, b: bool) -> bool {
        a && b
    }
    fn bottom() -> bool {
        false
    }
    fn top() -> bool {
        true
    }
}

impl SignalDomain for BooleanDomain {
    fn negate(a: bool) -> bool {
        !a
    }

    fn from_comparison(lhs: f64, op: CmpOp, rhs: f64) -> bool {
        op.holds(lhs, rhs)
    }
}

/// `<R ∪ {±inf}, max, min, -inf, +inf>` with arithmetic negation: robustness
/// semantics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxMinDomain;

impl Semiring for MaxMinDomain {
    type Value = f64;
    const NAME: &'static str = "maxmin";
    const IDEMPOTENT: bool = true;
    const TOTAL: bool = true;

    // Selections rather than f64::max/min so that the result is always one of
    // the operands bit for bit.
    fn choose(a: f64, b: f64) -> f64 {
        if b > a {
            b
        } else {
            a
        }
    }
    fn combine(a: f64, b: f64) -> f64 {
        if b < a {
            b
        } else {
            a
        }
    }
    fn bottom() -> f64 {
        f64::NEG_INFINITY
    }
    fn top() -> f64 {
        f64::INFINITY
    }
}

impl SignalDomain for MaxMinDomain {
    fn negate(a: f64) -> f64 {
        -a
    }

    /// `x >= c` and `x > c` map to `x - c`; `x <= c` and `x < c` to `c - x`.
    fn from_comparison(lhs: f64, op: CmpOp, rhs: f64) -> f64 {
        match op {
            CmpOp::Gt | CmpOp::Ge => lhs - rhs,
            CmpOp::Lt | CmpOp::Le => rhs - lhs,
        }
    }
}

/// `<R≥0 ∪ {+inf}, min, +, +inf, 0>`; not idempotent. Used for distances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tropical;

impl Semiring for Tropical {
    type Value = f64;
    const NAME: &'static str = "tropical";
    const IDEMPOTENT: bool = false;
    const TOTAL: bool = true;

    fn choose(a: f64, b: f64) -> f64 {
        if b < a {
            b
        } else {
            a
        }
    }
    fn combine(a: f64, b: f64) -> f64 {
        a + b
    }
    fn bottom() -> f64 {
        f64::INFINITY
    }
    fn top() -> f64 {
        0.0
    }
}

/// Natural number extended with a distinguished infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NatInf {
    Finite(u64),
    Infinite,
}

/// `<N ∪ {inf}, max, min, 0, inf>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegerSemiring;

impl Semiring for IntegerSemiring {
    type Value = NatInf;
    const NAME: &'static str = "integer";
    const IDEMPOTENT: bool = true;
    const TOTAL: bool = true;

    fn choose(a: NatInf, b: NatInf) -> NatInf {
        a.max(b)
    }
    fn combine(a: NatInf, b: NatInf) -> NatInf {
        a.min(b)
    }
    fn bottom() -> NatInf {
        NatInf::Finite(0)
    }
    fn top() -> NatInf {
        NatInf::Infinite
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_semiring_laws<S: Semiring>(a: S::Value, b: S::Value, c: S::Value) {
        // choose
        assert_eq!(S::choose(a, S::choose(b, c)), S::choose(S::choose(a, b), c));
        assert_eq!(S::choose(a, b), S::choose(b, a));
        assert_eq!(S::choose(S::bottom(), a), a);
        assert_eq!(S::choose(S::top(), a), S::top());
        // combine
        assert_eq!(
            S::combine(a, S::combine(b, c)),
            S::combine(S::combine(a, b), c)
        );
        assert_eq!(S::combine(a, b), S::combine(b, a));
        assert_eq!(S::combine(S::top(), a), a);
        assert_eq!(S::combine(S::bottom(), a), S::bottom());
        // distributivity
        assert_eq!(
            S::combine(a, S::choose(b, c)),
            S::choose(S::combine(a, b), S::combine(a, c))
        );
        // derived order is a partial order
        assert!(S::leq(a, a));
        if S::leq(a, b) && S::leq(b, a) {
            assert_eq!(a, b);
        }
        if S::leq(a, b) && S::leq(b, c) {
            assert!(S::leq(a, c));
        }
    }

    fn check_idempotent<S: Semiring>(a: S::Value) {
        assert_eq!(S::choose(a, a), a);
    }

    fn check_domain_laws<D: SignalDomain>(a: D::Value, b: D::Value) {
        assert_eq!(D::negate(D::top()), D::bottom());
        assert_eq!(D::negate(D::bottom()), D::top());
        assert_eq!(D::negate(D::negate(a)), a);
        assert_eq!(
            D::negate(D::choose(a, b)),
            D::combine(D::negate(a), D::negate(b))
        );
        assert_eq!(
            D::negate(D::combine(a, b)),
            D::choose(D::negate(a), D::negate(b))
        );
    }

    #[test]
    fn boolean_exhaustive() {
        let all = [false, true];
        for &a in &all {
            check_idempotent::<BooleanDomain>(a);
            for &b in &all {
                check_domain_laws::<BooleanDomain>(a, b);
                for &c in &all {
                    check_semiring_laws::<BooleanDomain>(a, b, c);
                }
            }
        }
        assert!(BooleanDomain::choose(true, false));
        for x in all {
            assert_eq!(BooleanDomain::combine(true, x), x);
        }
        assert!(!BooleanDomain::negate(BooleanDomain::negate(false)));
    }

    #[test]
    fn maxmin_examples() {
        assert_eq!(MaxMinDomain::choose(f64::NEG_INFINITY, 3.5), 3.5);
        assert_eq!(MaxMinDomain::combine(f64::INFINITY, 3.5), 3.5);
        // De Morgan by direct evaluation: -(max(1,2)) = min(-1,-2) = -2
        let lhs = MaxMinDomain::negate(MaxMinDomain::choose(1.0, 2.0));
        let rhs = MaxMinDomain::combine(-1.0, -2.0);
        assert_eq!(lhs, -2.0);
        assert_eq!(rhs, -2.0);
    }

    #[test]
    fn tropical_and_integer_examples() {
        assert_eq!(Tropical::choose(5.0, 3.0), 3.0);
        assert_eq!(Tropical::combine(5.0, 3.0), 8.0);
        assert_eq!(Tropical::combine(0.0, 7.25), 7.25);
        const { assert!(!Tropical::IDEMPOTENT) };
        assert_ne!(Tropical::combine(2.0, 2.0), 2.0);
        assert_eq!(
            IntegerSemiring::choose(NatInf::Finite(2), NatInf::Finite(7)),
            NatInf::Finite(7)
        );
        assert_eq!(
            IntegerSemiring::combine(NatInf::Infinite, NatInf::Finite(4)),
            NatInf::Finite(4)
        );
    }

    #[test]
    fn choose_all_folds_from_bottom() {
        assert_eq!(choose_all::<MaxMinDomain>([1.0, 4.0, 2.0]), 4.0);
        assert_eq!(choose_all::<MaxMinDomain>([]), f64::NEG_INFINITY);
        assert!(!choose_all::<BooleanDomain>([]));
        assert!(!choose_all::<BooleanDomain>([false, false]));
        assert_eq!(choose_all::<Tropical>([]), f64::INFINITY);
        assert!(combine_all::<BooleanDomain>([]));
    }

    #[test]
    fn comparison_embedding() {
        assert_eq!(MaxMinDomain::from_comparison(40.0, CmpOp::Gt, 30.0), 10.0);
        assert_eq!(MaxMinDomain::from_comparison(40.0, CmpOp::Le, 30.0), -10.0);
        assert!(BooleanDomain::from_comparison(30.0, CmpOp::Ge, 30.0));
        assert!(!BooleanDomain::from_comparison(30.0, CmpOp::Gt, 30.0));
    }

    fn extended_real() -> impl Strategy<Value = f64> {
        prop_oneof![
            1 => Just(f64::INFINITY),
            1 => Just(f64::NEG_INFINITY),
            8 => -1e6f64..1e6,
        ]
    }

    fn nonneg_real() -> impl Strategy<Value = f64> {
        prop_oneof![1 => Just(f64::INFINITY), 1 => Just(0.0), 8 => 0.0f64..1e3]
    }

    fn nat_inf() -> impl Strategy<Value = NatInf> {
        prop_oneof![1 => Just(NatInf::Infinite), 8 => (0u64..1000).prop_map(NatInf::Finite)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn maxmin_laws(a in extended_real(), b in extended_real(), c in extended_real()) {
            check_semiring_laws::<MaxMinDomain>(a, b, c);
            check_idempotent::<MaxMinDomain>(a);
            check_domain_laws::<MaxMinDomain>(a, b);
            // derived order is numeric <=
            prop_assert_eq!(MaxMinDomain::leq(a, b), a <= b);
        }

        #[test]
        fn integer_laws(a in nat_inf(), b in nat_inf(), c in nat_inf()) {
            check_semiring_laws::<IntegerSemiring>(a, b, c);
            check_idempotent::<IntegerSemiring>(a);
        }

        // Integer-valued samples keep + exact so associativity is checked
        // bit-wise.
        #[test]
        fn tropical_laws(a in 0u32..10_000, b in 0u32..10_000, c in 0u32..10_000, inf in 0u8..4) {
            let pick = |x: u32, slot: u8| if inf == slot { f64::INFINITY } else { x as f64 };
            let (a, b, c) = (pick(a, 1), pick(b, 2), pick(c, 3));
            check_semiring_laws::<Tropical>(a, b, c);
            check_idempotent::<Tropical>(a);
        }

        #[test]
        fn tropical_order_is_numeric_geq(a in nonneg_real(), b in nonneg_real()) {
            prop_assert_eq!(Tropical::leq(a, b), a >= b);
        }
    }
}
