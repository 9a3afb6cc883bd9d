//! Parse a coefficient expression, differentiate it and evaluate both.
use qho::expr::parse;

fn main() -> qho::Result<()> {
    let e = parse("exp(-0.1*t) * cos(2*t)^2 + sqrt(1 + t)")?;
    let de = e.differentiate();
    println!("f(t)  = {e}");
    println!("f'(t) = {de}");
    for t in [0.0, 0.5, 1.0, 2.0] {
        println!("t = {t:4}  f = {:>12.8}  f' = {:>12.8}", e.evaluate(t)?, de.evaluate(t)?);
    }
    match parse("sin(t") {
        Err(err) => println!("parse error: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
