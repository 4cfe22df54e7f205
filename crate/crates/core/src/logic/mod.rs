//! Formula syntax: the AST, its textual form, expansion of derived operators
//! and validation against an interpretation context.

mod context;
mod parser;

use std::fmt;

pub use context::{validate, InterpretationContext, ValidationError};
pub use parser::{parse, ParseError};

use crate::space::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// Operator of the complementary predicate: `!(x <= r)` is `x > r`.
    pub fn complement(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

/// Closed time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo <= self.hi
    }
}

/// Which way a distance predicate is closed, in numeric order of distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// `x` satisfies and `y <= x` implies `y` satisfies: an upper bound, as
    /// required under reach.
    Downward,
    /// `x` satisfies and `y >= x` implies `y` satisfies: a lower bound, as
    /// required under escape.
    Upward,
}

/// Distance predicate `distance op value`; `value` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBound {
    pub op: CmpOp,
    pub value: f64,
}

impl DistanceBound {
    pub fn new(op: CmpOp, value: f64) -> Self {
        DistanceBound { op, value }
    }

    pub fn at_most(value: f64) -> Self {
        DistanceBound::new(CmpOp::Le, value)
    }

    pub fn at_least(value: f64) -> Self {
        DistanceBound::new(CmpOp::Ge, value)
    }

    /// `< infinity`: any finite distance.
    pub fn finite() -> Self {
        DistanceBound::new(CmpOp::Lt, f64::INFINITY)
    }

    #[inline]
    pub fn holds(&self, distance: f64) -> bool {
        self.op.holds(distance, self.value)
    }

    pub fn complement(&self) -> Self {
        DistanceBound::new(self.op.complement(), self.value)
    }

    pub fn closure(&self) -> Closure {
        match self.op {
            CmpOp::Lt | CmpOp::Le => Closure::Downward,
            CmpOp::Gt | CmpOp::Ge => Closure::Upward,
        }
    }

    /// Checks `closure` on every pair of `samples`.
    pub fn is_closed_on(&self, closure: Closure, samples: &[f64]) -> bool {
        samples.iter().all(|&x| {
            !self.holds(x)
                || samples.iter().all(|&y| {
                    let below = match closure {
                        Closure::Downward => y <= x,
                        Closure::Upward => y >= x,
                    };
                    !below || self.holds(y)
                })
        })
    }
}

impl fmt::Display for DistanceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value == f64::INFINITY {
            write!(f, "[{} infinity]", self.op.symbol())
        } else {
            write!(f, "[{} {}]", self.op.symbol(), self.value)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    /// Boolean channel.
    Atomic(String),
    /// Comparison of a real channel with a threshold.
    Cmp {
        channel: String,
        op: CmpOp,
        threshold: f64,
    },
    /// Holds exactly at one location.
    At(Location),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until {
        interval: Interval,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    Since {
        interval: Interval,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    Eventually(Interval, Box<Formula>),
    Globally(Interval, Box<Formula>),
    Once(Interval, Box<Formula>),
    Historically(Interval, Box<Formula>),
    Reach {
        distance: String,
        bound: DistanceBound,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    Escape {
        distance: String,
        bound: DistanceBound,
        sub: Box<Formula>,
    },
    Somewhere {
        distance: String,
        bound: DistanceBound,
        sub: Box<Formula>,
    },
    Everywhere {
        distance: String,
        bound: DistanceBound,
        sub: Box<Formula>,
    },
    Surround {
        distance: String,
        bound: DistanceBound,
        left: Box<Formula>,
        right: Box<Formula>,
    },
}

impl Formula {
    pub fn atomic(name: impl Into<String>) -> Self {
        Formula::Atomic(name.into())
    }

    pub fn cmp(channel: impl Into<String>, op: CmpOp, threshold: f64) -> Self {
        Formula::Cmp {
            channel: channel.into(),
            op,
            threshold,
        }
    }

    pub fn negated(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn reach(self, distance: &str, bound: DistanceBound, right: Formula) -> Self {
        Formula::Reach {
            distance: distance.to_string(),
            bound,
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn escape(distance: &str, bound: DistanceBound, sub: Formula) -> Self {
        Formula::Escape {
            distance: distance.to_string(),
            bound,
            sub: Box::new(sub),
        }
    }

    pub fn is_core(&self) -> bool {
        !matches!(
            self,
            Formula::Eventually(..)
                | Formula::Globally(..)
                | Formula::Once(..)
                | Formula::Historically(..)
                | Formula::Somewhere { .. }
                | Formula::Everywhere { .. }
                | Formula::Surround { .. }
        )
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | Atomic(_) | Cmp { .. } | At(_) => vec![],
            Not(a)
            | Eventually(_, a)
            | Globally(_, a)
            | Once(_, a)
            | Historically(_, a)
            | Escape { sub: a, .. }
            | Somewhere { sub: a, .. }
            | Everywhere { sub: a, .. } => vec![a],
            And(a, b)
            | Or(a, b)
            | Until {
                left: a, right: b, ..
            }
            | Since {
                left: a, right: b, ..
            }
            | Reach {
                left: a, right: b, ..
            }
            | Surround {
                left: a, right: b, ..
            } => vec![a, b],
        }
    }

    /// Every node of the tree, pre-order.
    pub fn nodes(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let node = out[i];
            out.extend(node.children());
            i += 1;
        }
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Whether any node is a temporal operator.
    pub fn is_temporal(&self) -> bool {
        self.nodes().iter().any(|n| {
            matches!(
                n,
                Formula::Until { .. }
                    | Formula::Since { .. }
                    | Formula::Eventually(..)
                    | Formula::Globally(..)
                    | Formula::Once(..)
                    | Formula::Historically(..)
            )
        })
    }
}

fn boxed(f: Formula) -> Box<Formula> {
    Box::new(f)
}

/// Rewrites every derived operator into core ones: eventually/globally into
/// until, once/historically into since, somewhere/everywhere into reach and
/// surround into reach and escape.
pub fn expand_derived(formula: &Formula) -> Formula {
    use Formula::*;
    match formula {
        True | Atomic(_) | Cmp { .. } | At(_) => formula.clone(),
        Not(a) => Not(boxed(expand_derived(a))),
        And(a, b) => And(boxed(expand_derived(a)), boxed(expand_derived(b))),
        Or(a, b) => Or(boxed(expand_derived(a)), boxed(expand_derived(b))),
        Until {
            interval,
            left,
            right,
        } => Until {
            interval: *interval,
            left: boxed(expand_derived(left)),
            right: boxed(expand_derived(right)),
        },
        Since {
            interval,
            left,
            right,
        } => Since {
            interval: *interval,
            left: boxed(expand_derived(left)),
            right: boxed(expand_derived(right)),
        },
        Eventually(i, a) => Until {
            interval: *i,
            left: boxed(True),
            right: boxed(expand_derived(a)),
        },
        Globally(i, a) => Not(boxed(Until {
            interval: *i,
            left: boxed(True),
            right: boxed(Not(boxed(expand_derived(a)))),
        })),
        Once(i, a) => Since {
            interval: *i,
            left: boxed(True),
            right: boxed(expand_derived(a)),
        },
        Historically(i, a) => Not(boxed(Since {
            interval: *i,
            left: boxed(True),
            right: boxed(Not(boxed(expand_derived(a)))),
        })),
        Reach {
            distance,
            bound,
            left,
            right,
        } => Reach {
            distance: distance.clone(),
            bound: *bound,
            left: boxed(expand_derived(left)),
            right: boxed(expand_derived(right)),
        },
        Escape {
            distance,
            bound,
            sub,
        } => Escape {
            distance: distance.clone(),
            bound: *bound,
            sub: boxed(expand_derived(sub)),
        },
        Somewhere {
            distance,
            bound,
            sub,
        } => Reach {
            distance: distance.clone(),
            bound: *bound,
            left: boxed(True),
            right: boxed(expand_derived(sub)),
        },
        Everywhere {
            distance,
            bound,
            sub,
        } => Not(boxed(Reach {
            distance: distance.clone(),
            bound: *bound,
            left: boxed(True),
            right: boxed(Not(boxed(expand_derived(sub)))),
        })),
        Surround {
            distance,
            bound,
            left,
            right,
        } => {
            let inside = expand_derived(left);
            let wall = expand_derived(right);
            let leak = Reach {
                distance: distance.clone(),
                bound: *bound,
                left: boxed(inside.clone()),
                right: boxed(Not(boxed(Or(boxed(inside.clone()), boxed(wall))))),
            };
            let exit = Escape {
                distance: distance.clone(),
                bound: bound.complement(),
                sub: boxed(inside.clone()),
            };
            And(
                boxed(And(boxed(inside), boxed(Not(boxed(leak))))),
                boxed(Not(boxed(exit))),
            )
        }
    }
}

fn fmt_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x}")
}

fn fmt_interval(f: &mut fmt::Formatter<'_>, i: &Interval) -> fmt::Result {
    write!(f, "[")?;
    fmt_num(f, i.lo)?;
    write!(f, ",")?;
    fmt_num(f, i.hi)?;
    write!(f, "]")
}

/// Fully bracketed text form; `parse` reads it back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            True => write!(f, "true"),
            Atomic(name) => write!(f, "{name}"),
            Cmp {
                channel,
                op,
                threshold,
            } => {
                write!(f, "{channel} {} ", op.symbol())?;
                fmt_num(f, *threshold)
            }
            At(l) => write!(f, "@{l}"),
            Not(a) => write!(f, "!{a}"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Until {
                interval,
                left,
                right,
            } => {
                write!(f, "({left} U")?;
                fmt_interval(f, interval)?;
                write!(f, " {right})")
            }
            Since {
                interval,
                left,
                right,
            } => {
                write!(f, "({left} S")?;
                fmt_interval(f, interval)?;
                write!(f, " {right})")
            }
            Eventually(i, a) | Globally(i, a) | Once(i, a) | Historically(i, a) => {
                let op = match self {
                    Eventually(..) => "F",
                    Globally(..) => "G",
                    Once(..) => "O",
                    _ => "H",
                };
                write!(f, "{op}")?;
                fmt_interval(f, i)?;
                write!(f, " {a}")
            }
            Reach {
                distance,
                bound,
                left,
                right,
            } => write!(f, "({left} reach({distance}){bound} {right})"),
            Surround {
                distance,
                bound,
                left,
                right,
            } => write!(f, "({left} surround({distance}){bound} {right})"),
            Escape {
                distance,
                bound,
                sub,
            } => write!(f, "escape({distance}){bound} {sub}"),
            Somewhere {
                distance,
                bound,
                sub,
            } => write!(f, "somewhere({distance}){bound} {sub}"),
            Everywhere {
                distance,
                bound,
                sub,
            } => write!(f, "everywhere({distance}){bound} {sub}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn expansions_of_derived_spatial_operators() {
        let phi = Formula::atomic("p");
        let d = DistanceBound::at_most(2.0);
        let some = Formula::Somewhere {
            distance: "hops".into(),
            bound: d,
            sub: Box::new(phi.clone()),
        };
        assert_eq!(
            expand_derived(&some),
            Formula::True.reach("hops", d, phi.clone())
        );
        let every = Formula::Everywhere {
            distance: "hops".into(),
            bound: d,
            sub: Box::new(phi.clone()),
        };
        assert_eq!(
            expand_derived(&every),
            Formula::True
                .reach("hops", d, phi.clone().negated())
                .negated()
        );
    }

    #[test]
    fn surround_uses_complemented_bound() {
        let s = Formula::Surround {
            distance: "hops".into(),
            bound: DistanceBound::at_most(3.0),
            left: Box::new(Formula::atomic("a")),
            right: Box::new(Formula::atomic("b")),
        };
        let e = expand_derived(&s);
        let escapes: Vec<_> = e
            .nodes()
            .into_iter()
            .filter_map(|n| match n {
                Formula::Escape { bound, .. } => Some(*bound),
                _ => None,
            })
            .collect();
        assert_eq!(escapes, vec![DistanceBound::new(CmpOp::Gt, 3.0)]);
        assert!(e.nodes().iter().all(|n| n.is_core()));
    }

    #[test]
    fn bound_closure_matches_sampling() {
        let samples: Vec<f64> = (0..=20)
            .map(|k| k as f64 * 0.5)
            .chain([f64::INFINITY])
            .collect();
        for op in [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge] {
            for v in [0.0, 1.0, 3.5, f64::INFINITY] {
                let b = DistanceBound::new(op, v);
                assert!(b.is_closed_on(b.closure(), &samples), "{b}");
            }
        }
        let upper = DistanceBound::at_most(3.0);
        assert!(!upper.is_closed_on(Closure::Upward, &samples));
        assert_eq!(upper.complement(), DistanceBound::new(CmpOp::Gt, 3.0));
    }

    fn ident() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("p".to_string()),
            Just("end_dev".to_string()),
            Just("X_B".to_string()),
            Just("router2".to_string()),
        ]
    }

    fn interval() -> impl Strategy<Value = Interval> {
        (0u32..20, 0u32..20).prop_map(|(a, l)| Interval::new(a as f64 * 0.5, (a + l) as f64 * 0.5))
    }

    fn bound() -> impl Strategy<Value = DistanceBound> {
        (
            prop_oneof![Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge)],
            prop_oneof![Just(f64::INFINITY), (0u32..100).prop_map(|x| x as f64 / 4.0)],
        )
            .prop_map(|(op, v)| DistanceBound::new(op, v))
    }

    fn dist() -> impl Strategy<Value = String> {
        prop_oneof![Just("hops".to_string()), Just("delta".to_string())]
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            ident().prop_map(Formula::Atomic),
            (ident(), prop_oneof![Just(CmpOp::Lt), Just(CmpOp::Ge)], -1000i32..1000)
                .prop_map(|(c, op, t)| Formula::cmp(c, op, t as f64 / 8.0)),
            (0usize..20).prop_map(Formula::At),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let i = inner;
            prop_oneof![
                i.clone().prop_map(|a| Formula::Not(Box::new(a))),
                (i.clone(), i.clone()).prop_map(|(a, b)| a.and(b)),
                (i.clone(), i.clone()).prop_map(|(a, b)| a.or(b)),
                (interval(), i.clone(), i.clone()).prop_map(|(interval, a, b)| Formula::Until {
                    interval,
                    left: Box::new(a),
                    right: Box::new(b)
                }),
                (interval(), i.clone(), i.clone()).prop_map(|(interval, a, b)| Formula::Since {
                    interval,
                    left: Box::new(a),
                    right: Box::new(b)
                }),
                (interval(), i.clone(), 0u8..4).prop_map(|(iv, a, k)| match k {
                    0 => Formula::Eventually(iv, Box::new(a)),
                    1 => Formula::Globally(iv, Box::new(a)),
                    2 => Formula::Once(iv, Box::new(a)),
                    _ => Formula::Historically(iv, Box::new(a)),
                }),
                (dist(), bound(), i.clone(), i.clone()).prop_map(|(d, bound, a, b)| Formula::Reach {
                    distance: d,
                    bound,
                    left: Box::new(a),
                    right: Box::new(b)
                }),
                (dist(), bound(), i.clone(), i.clone()).prop_map(|(d, bound, a, b)| Formula::Surround {
                    distance: d,
                    bound,
                    left: Box::new(a),
                    right: Box::new(b)
                }),
                (dist(), bound(), i.clone(), 0u8..3).prop_map(|(d, bound, a, k)| {
                    let sub = Box::new(a);
                    match k {
                        0 => Formula::Escape { distance: d, bound, sub },
                        1 => Formula::Somewhere { distance: d, bound, sub },
                        _ => Formula::Everywhere { distance: d, bound, sub },
                    }
                }),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let text = f.to_string();
            let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn expansion_is_idempotent_and_core(f in arb_formula()) {
            let once = expand_derived(&f);
            prop_assert!(once.nodes().iter().all(|n| n.is_core()));
            prop_assert_eq!(expand_derived(&once), once);
        }
    }
}
