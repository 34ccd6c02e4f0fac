//! The four bundled two-dimensional instances (`p = r = 1`).
//!
//! | # | `A₁`          | character of `A₁`   |
//! |---|---------------|---------------------|
//! | 1 | diag(1.5, 2)  | positive definite   |
//! | 2 | diag(1, 0)    | positive semidefinite |
//! | 3 | diag(−1, −1.5)| negative definite   |
//! | 4 | diag(−3, 1)   | indefinite          |

use crate::io::ProblemFile;
use crate::problem::PrimalProblem;

const EXAMPLES: [&str; 4] = [
    include_str!("../fixtures/example1.json"),
    include_str!("../fixtures/example2.json"),
    include_str!("../fixtures/example3.json"),
    include_str!("../fixtures/example4.json"),
];

/// Raw JSON of example `k` (1-based).
pub fn example_json(k: usize) -> &'static str {
    assert!((1..=4).contains(&k), "examples are numbered 1 to 4");
    EXAMPLES[k - 1]
}

/// Parsed instance for example `k` (1-based).
pub fn example(k: usize) -> PrimalProblem {
    ProblemFile::from_json_str(example_json(k))
        .and_then(|f| f.to_problem())
        .expect("bundled fixtures are valid")
}
