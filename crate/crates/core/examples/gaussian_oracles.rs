// Closed-form covariance and normalizing sequence for Gaussian FLM data,
// checked against simulation.

use rpflm::oracles::{
    brownian_eigenvalues, k1_covariance, k1_monte_carlo, tnx_limit, tnx_sequence, GaussianFlmSpec,
};

fn main() {
    let lambda = brownian_eigenvalues(6);
    let spec = GaussianFlmSpec::new(
        lambda,
        vec![2.0, 4.0, 5.0, 0.0, 0.0, 0.0],
        vec![1.0, -1.0, 0.5, 0.5, 0.0, 1.0],
        0.1,
    )
    .unwrap();

    let points = [-0.3, 0.0, 0.4];
    let mc = k1_monte_carlo(&spec, &points, 100, 2000, 1).unwrap();
    println!("   s      t     K1      simulated (se)");
    for (a, s) in points.iter().enumerate() {
        for (b, t) in points.iter().enumerate().skip(a) {
            let e = mc[a][b];
            println!(
                "{s:>5} {t:>5}  {:.4}   {:.4} ({:.4})",
                k1_covariance(&spec, *s, *t).unwrap(),
                e.mean,
                e.se
            );
        }
    }

    for x in [-1.0, 0.0, 1.0] {
        let t: Vec<String> = (1..=6)
            .map(|k| format!("{:.4}", tnx_sequence(&spec, x, k).unwrap()))
            .collect();
        println!("x = {x:>4}: t = {}  limit {:.4}", t.join(" "), tnx_limit(&spec, x).unwrap());
    }
}
