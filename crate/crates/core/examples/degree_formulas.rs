// Degree formulas for branched surfaces.

use singlink::invariants::{normal_degree_immersed, normal_degree_thm1, sl_paper, sl_std, tangent_degree};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // A sphere (chi = 2) with one branch point of order 2, i.e. N = 3.
    println!("tangent degree, chi = 2, orders [2]     = {}", tangent_degree(2, &[2]));
    println!("tangent degree, chi = 0, orders [1, 1] = {}", tangent_degree(0, &[1, 1]));

    // Immersed: each signed double point shifts the normal degree by 2.
    println!("normal degree, immersed, [S]^2 = 4, d = 1 = {}", normal_degree_immersed(4, 1));

    // Branched: the singularity invariants E replace the double-point term.
    println!("normal degree, [S]^2 = 2, E = [2]        = {}", normal_degree_thm1(2, &[2]));
    println!("normal degree, [S]^2 = 4, E = [3, -3]    = {}", normal_degree_thm1(4, &[3, -3]));

    // Two sign conventions for the self-linking of a braid with N strands and e = 3.
    println!("trefoil, N = 2, e = 3: n - e = {}, e - n = {}", sl_paper(2, 3), sl_std(2, 3));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
