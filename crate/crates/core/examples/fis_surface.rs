//! Print the adaptation-rate surfaces of the bundled fuzzy rule bases.

use rovtrack::fuzzy::{RuleBase, RuleBaseSpec};

fn main() {
    let translational = RuleBase::translational();
    let rotational = RuleBase::rotational();
    println!("{:>6} {:>12} {:>12}", "|x|", "translational", "rotational");
    let mut x: f64 = 0.0;
    while x <= 6.0 + 1e-9 {
        println!("{x:>6.2} {:>12.4} {:>12.5}", translational.rate(x), rotational.rate(x));
        x += 0.25;
    }

    // a rule base can be redefined from JSON; here with wider consequents
    let mut spec: RuleBaseSpec = serde_json::from_str(include_str!("../data/fis_translational.json")).unwrap();
    spec.consequent_width = 0.25;
    let wide = spec.build().unwrap();
    println!("wider consequents at |x| = 1.5: {:.3} (bundled {:.3})", wide.rate(1.5), translational.rate(1.5));
}
