#![no_main]

use dde_bounds::expr::Expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(expr) = Expr::parse(text) {
        // The fully parenthesized form must parse back to the same tree.
        let shown = expr.to_string();
        let again = Expr::parse(&shown).expect("display output parses");
        assert_eq!(shown, again.to_string());
        for x in [0.0, 0.5, 1.0, 7.25] {
            let _ = expr.eval(x);
            let _ = expr.eval_jet(x);
        }
    }
});
