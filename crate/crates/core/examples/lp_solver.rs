//! The revised simplex solver on a small production-planning LP, with its
//! duality certificate and text dump.

use sparselab::lp::{solve_lp, write_dump, LpProblem, LpStatus, Relation};

fn main() -> sparselab::Result<()> {
    // Maximise 3x + 5y, written as minimising the negative.
    let mut p = LpProblem::new(vec![-3.0, -5.0]);
    p.add_row(vec![1.0, 0.0], Relation::Le, 4.0);
    p.add_row(vec![0.0, 2.0], Relation::Le, 12.0);
    p.add_row(vec![3.0, 2.0], Relation::Le, 18.0);
    print!("{}", write_dump(&p));

    let sol = solve_lp(&p)?;
    assert_eq!(sol.status, LpStatus::Optimal);
    println!("x = {:?}", sol.primal);
    println!("objective {:.4}, dual objective {:.4}, gap {:.1e}", sol.objective, sol.dual_objective, sol.duality_gap);
    println!("row multipliers {:?}", sol.dual);

    p.add_row(vec![1.0, 1.0], Relation::Ge, 20.0);
    println!("with x + y >= 20: {:?}", solve_lp(&p)?.status);
    Ok(())
}
