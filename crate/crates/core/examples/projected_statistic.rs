// The marked empirical process along one random direction and its KS and CvM
// norms.

use rpflm::rng::stream;
use rpflm::rptest::{process_statistic, project, sample_direction, Sampler};
use rpflm::simlab::{gen_process, gen_response, scenario};
use rpflm::{center, compute_fpc, estimate_rho};

fn main() {
    let spec = scenario(7).unwrap();
    let mut rng = stream(5, &[]);
    let x = gen_process(spec.process, 60, &spec.grid, &mut rng).unwrap();
    let (xc, _) = center(&x);
    let basis = compute_fpc(&xc, 20).unwrap();

    for d in [0, 2] {
        let y = gen_response(&spec, &x, d, &mut rng).unwrap();
        let (yc, _) = rpflm::funspace::center_response(&y);
        let fit = estimate_rho(&xc, &yc, &basis, 3).unwrap();
        let h = sample_direction(&basis, 0.95, Sampler::DataDriven, 0, &mut rng).unwrap();
        let proj = project(&xc, &h).unwrap();
        let stat = process_statistic(&proj, fit.residuals()).unwrap();
        println!("S7, d = {d}: KS = {:.4}, CvM = {:.5}", stat.ks, stat.cvm);
    }
}
