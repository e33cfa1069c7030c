// A small Monte Carlo size and power study over three scenarios.

use rpflm::simlab::{run_study, StudyConfig};
use rpflm::TestConfig;

fn main() {
    let cfg = StudyConfig {
        scenarios: vec![1, 7, 8],
        deviations: vec![0, 1],
        sizes: vec![50],
        trials: 40,
        test: TestConfig {
            bootstrap: 200,
            ..TestConfig::default()
        },
        seed: 4,
        timing: false,
    };
    println!("cell      0.01   0.05   0.10   mean d_n");
    for r in run_study(&cfg).unwrap() {
        println!(
            "{},d={}   {:.3}  {:.3}  {:.3}  {:.2}",
            r.scenario, r.d, r.reject_01, r.reject_05, r.reject_10, r.mean_rank
        );
    }
}
