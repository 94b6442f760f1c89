//! Property-based checks for the expression language.

use fpquad::exprparse::{eval_expr, parse, BinOp, Expr, Func};
use fpquad::Complex64;
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..1e6f64).prop_map(Expr::Num),
        Just(Expr::Pi),
        Just(Expr::E),
        Just(Expr::Var),
    ];
    leaf.prop_recursive(5, 64, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, op)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op];
                Expr::Bin(op, Box::new(a), Box::new(b))
            }),
            (inner.clone(), 0..6u32)
                .prop_map(|(a, k)| Expr::Pow(Box::new(a), Box::new(Expr::Num(k as f64)))),
            (inner, 0..5usize).prop_map(|(a, f)| {
                let f = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt][f];
                Expr::Fun(f, Box::new(a))
            }),
        ]
    })
}

/// Rational expressions with integer powers: closed under real arithmetic.
fn arb_real_closed_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(Expr::Num),
        Just(Expr::Pi),
        Just(Expr::Var),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, op)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op];
                Expr::Bin(op, Box::new(a), Box::new(b))
            }),
            (inner, 0..5u32)
                .prop_map(|(a, k)| Expr::Pow(Box::new(a), Box::new(Expr::Num(k as f64)))),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let printed = e.to_string();
        let reparsed = parse(&printed).expect("printer output must reparse");
        prop_assert_eq!(e, reparsed);
    }

    #[test]
    fn parser_never_panics(s in "\\PC*") {
        let _ = parse(&s);
    }

    #[test]
    fn parser_never_panics_operator_soup(s in "[-+*/^()a-z0-9. ]{0,40}") {
        let _ = parse(&s);
    }

    #[test]
    fn real_arithmetic_stays_exactly_real(e in arb_real_closed_expr(), x in 0.0..1.0f64) {
        if let Ok(v) = eval_expr::<f64>(&e, Complex64::new(x, 0.0)) {
            prop_assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn eval_is_deterministic(e in arb_expr(), x in 0.0..1.0f64, y in -1.0..1.0f64) {
        let z = Complex64::new(x, y);
        let a = eval_expr::<f64>(&e, z);
        let b = eval_expr::<f64>(&e, z);
        match (a, b) {
            (Ok(va), Ok(vb)) => prop_assert_eq!(va, vb),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "determinism violated"),
        }
    }
}
