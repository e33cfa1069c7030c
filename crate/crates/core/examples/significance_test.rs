// Testing for no effect, m = 0, and for a fully specified regression function.

use rpflm::rng::stream;
use rpflm::simlab::{gen_process, gen_response, scenario};
use rpflm::{test_significance, test_simple, TestConfig};

fn main() {
    let spec = scenario(1).unwrap();
    let mut rng = stream(8, &[]);
    let x = gen_process(spec.process, 80, &spec.grid, &mut rng).unwrap();
    let y = gen_response(&spec, &x, 0, &mut rng).unwrap();
    let cfg = TestConfig {
        bootstrap: 500,
        ..TestConfig::default()
    };

    let none = test_significance(&x, &y, &cfg).unwrap();
    println!("H0: m = 0            p_fdr = {:.3}", none.p_fdr);

    let grid = spec.grid.clone();
    let rho = spec.rho.clone();
    let truth = test_simple(&x, &y, |xi| grid.dot(xi, rho.values()).unwrap(), &cfg).unwrap();
    println!("H0: m = <X, rho>     p_fdr = {:.3}", truth.p_fdr);
}
