use std::sync::Arc;

use ma_lab::experiments::par_maximal;
use ma_lab_core::covering::maximal_function;
use ma_lab_core::{ConvexDomain, Grid, PotentialField, ScalarField};

#[test]
fn parallel_maximal_function_matches_serial() {
    let grid = Arc::new(Grid::new(ConvexDomain::ellipse(1.0, 0.7).unwrap(), 1.0 / 16.0).unwrap());
    let pot = PotentialField::from_fn(grid.clone(), |p| {
        0.5 * (p[0] * p[0] + p[1] * p[1]) + (p[0].powi(4) + p[1].powi(4)) / 24.0
    })
    .unwrap();
    let f = ScalarField::from_fn(grid.clone(), |p| (3.0 * p[0]).sin() + p[0] * p[1]);
    let serial = maximal_function(&pot, &f, 0.5).unwrap();
    let parallel = par_maximal(&pot, &f, 0.5);
    assert_eq!(serial.values, parallel.values);
}
