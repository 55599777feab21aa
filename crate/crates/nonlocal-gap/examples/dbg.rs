use nonlocal_gap::basis::EigenBasis;
use nonlocal_gap::domain::DomainSpec;
use nonlocal_gap::measure::JumpMeasure;
use nonlocal_gap::secular::SecularFunction;
use std::f64::consts::PI;

fn main() {
    let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 48).unwrap();
    let nu = JumpMeasure::point(&[1.0 / 9.0, 1.0 / 9.0]);
    let ef = SecularFunction::build(&basis, &nu).unwrap();
    println!("poles in (-2.5pi2,-pi2): {:?}", ef.poles_in(-2.5 * PI * PI, -PI * PI));
    for i in 0..=10 {
        let x = -2.5 * PI * PI + (1.5 * PI * PI) * i as f64 / 10.0;
        match ef.evaluate_real(x) {
            Ok((v, e)) => println!("E({:+.4} pi2) = {:+.6e} +- {:.2e}", x / (PI * PI), v, e),
            Err(err) => println!("E({:+.4} pi2) -> {err}", x / (PI * PI)),
        }
    }
}
