// Rejection floor of the FDR combination applied to discrete bootstrap
// p-values, with and without the positive correction.

use rpflm::simlab::fdr_discretization_experiment;

fn main() {
    let rows = fdr_discretization_experiment(&[1, 5, 25], &[500], 2000, &[0.01, 0.05], 9).unwrap();
    println!("  K     B  alpha    rate  corrected   floor");
    for r in rows {
        println!(
            "{:>3} {:>5}  {:.2}   {:.4}   {:.4}    {:.4}",
            r.projections, r.bootstrap, r.alpha, r.rate, r.rate_corrected, r.floor
        );
    }
}
