// Truncated FPC regression on data from scenario S1, with the rank chosen by
// SICc.

use rpflm::rng::stream;
use rpflm::simlab::{gen_process, gen_response, scenario};
use rpflm::{center, compute_fpc, estimate_rho, select_rank_sicc};

fn main() {
    let spec = scenario(1).unwrap();
    let mut rng = stream(3, &[]);
    let x = gen_process(spec.process, 100, &spec.grid, &mut rng).unwrap();
    let y = gen_response(&spec, &x, 0, &mut rng).unwrap();

    let (xc, _) = center(&x);
    let (yc, _) = rpflm::funspace::center_response(&y);
    let basis = compute_fpc(&xc, 10).unwrap();
    let sel = select_rank_sicc(&xc, &yc, &basis, 10).unwrap();
    for (d, v) in sel.sicc.iter().enumerate() {
        let mark = if d + 1 == sel.rank { " <-" } else { "" };
        println!("d = {:>2}  SICc = {:>9.4}{mark}", d + 1, v);
    }

    let fit = estimate_rho(&xc, &yc, &basis, sel.rank).unwrap();
    let err = spec
        .grid
        .norm(
            &fit.rho_hat()
                .values()
                .iter()
                .zip(spec.rho.values())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
        .unwrap();
    println!("||rho_hat - rho|| = {err:.4}  (||rho|| = {:.4})", spec.grid.norm(spec.rho.values()).unwrap());
    let rss: f64 = fit.residuals().iter().map(|e| e * e).sum();
    println!("residual variance {:.4}, noise variance {:.4}", rss / 100.0, spec.sigma2);
}
