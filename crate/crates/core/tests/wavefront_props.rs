use conewave::io::{FieldSpec, GridSpec};
use conewave::multiplier_engine::GridField;
use conewave::symbols::bridge;
use conewave::wavefront::{flagged_indices, EDescriptor, ScanParams, Scanner};
use num_complex::Complex64;

const GRID: GridSpec = GridSpec { n: 2, period: 16.0, size: 512 };

fn jump() -> GridField {
    FieldSpec::JumpSheet { radius: 3.0 }.build(&GRID).unwrap()
}

/// Jump across `x_2 = 0` instead of `x_1 = 0`.
fn jump_turned() -> GridField {
    GridField::from_fn(2, GRID.period, GRID.size, |x| {
        let step = if x[1] > 0.0 {
            1.0
        } else if x[1] == 0.0 {
            0.5
        } else {
            0.0
        };
        Complex64::new(step * bridge(2.0 * (1.0 - x[0].hypot(x[1]) / 3.0)), 0.0)
    })
    .unwrap()
}

fn within_one_step(set: &[usize], i: usize, m: usize) -> bool {
    set.iter().any(|&k| {
        let d = (k + m - i) % m;
        d <= 1 || d == m - 1
    })
}

#[test]
fn flagged_sets_grow_with_s() {
    let u = jump();
    let params = ScanParams::default();
    let mut prev: Option<Vec<usize>> = None;
    for s in [0.25, 0.5, 0.75, 1.25] {
        let flagged =
            flagged_indices(&Scanner::new(EDescriptor::Sobolev(s), params.clone()).unwrap().sigma(&u).unwrap());
        if let Some(p) = &prev {
            assert!(p.iter().all(|&i| within_one_step(&flagged, i, params.directions)), "s = {s}");
        }
        prev = Some(flagged);
    }
    assert!(!prev.unwrap().is_empty());
}

#[test]
fn quarter_turn_of_the_field_turns_the_flags() {
    let params = ScanParams::default();
    let m = params.directions;
    let scanner = Scanner::new(EDescriptor::Sobolev(0.75), params).unwrap();
    let a = flagged_indices(&scanner.sigma(&jump()).unwrap());
    let b = flagged_indices(&scanner.sigma(&jump_turned()).unwrap());
    assert!(!a.is_empty());
    let turned: Vec<usize> = a.iter().map(|i| (i + m / 4) % m).collect();
    assert!(turned.iter().all(|&i| within_one_step(&b, i, m)));
    assert!(b.iter().all(|&i| within_one_step(&turned, i, m)));
}

#[test]
fn localized_scan_is_empty_away_from_the_sheet() {
    let scanner = Scanner::new(EDescriptor::Sobolev(0.75), ScanParams::default()).unwrap();
    let u = jump();
    let off = scanner.localized(&u, [1.0, 0.0]).unwrap();
    assert!(off.flagged.is_empty() && !off.windows_nonempty);
    let on = scanner.localized(&u, [0.0, 0.5]).unwrap();
    assert!(on.windows_nonempty && !on.flagged.is_empty());
}

#[test]
fn besov_scale_flags_the_delta_everywhere() {
    let u = FieldSpec::Delta { at: None }.build(&GRID).unwrap();
    let params = ScanParams::default();
    let flagged =
        flagged_indices(&Scanner::new(EDescriptor::BesovInfInf(0.5), params.clone()).unwrap().sigma(&u).unwrap());
    assert_eq!(flagged.len(), params.directions);
    let smooth = FieldSpec::Gaussian { sigma: 0.5, center: None }.build(&GRID).unwrap();
    let none = flagged_indices(&Scanner::new(EDescriptor::BesovInfInf(3.0), params).unwrap().sigma(&smooth).unwrap());
    assert!(none.is_empty());
}

#[test]
fn support_outside_the_quarter_box_is_rejected() {
    let u = FieldSpec::JumpSheet { radius: 5.0 }.build(&GRID).unwrap();
    let scanner = Scanner::new(EDescriptor::Sobolev(0.0), ScanParams::default()).unwrap();
    assert!(scanner.sigma(&u).is_err());
}
