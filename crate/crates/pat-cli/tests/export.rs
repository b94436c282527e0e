use pat_cli::error::CliError;
use pat_cli::export::{export_grid, Format};
use pat_core::spectral::{read_patgrid, GridSpec, RealField};
use pat_core::PatError;
use tempfile::TempDir;

fn noise(n: usize) -> RealField {
    let g = GridSpec::centered(2, n, 1e-3).unwrap();
    // Deterministic scramble; any non-trivial pattern will do.
    RealField::from_fn(g, |x| ((x[0] * 7.3e3).sin() * 43758.5453 + x[1] * 1e3).fract()).unwrap()
}

#[test]
fn patgrid_round_trip_is_exact() {
    let tmp = TempDir::new().unwrap();
    let f = noise(32);
    let files = export_grid(&f, Format::Patgrid, &tmp.path().join("f")).unwrap();
    let back = read_patgrid(&files[0]).unwrap();
    assert_eq!(back, f);
}

#[test]
fn constant_field_gives_flat_pgm() {
    let tmp = TempDir::new().unwrap();
    let g = GridSpec::centered(2, 16, 1e-3).unwrap();
    let files = export_grid(&RealField::constant(g, 2.5), Format::Pgm, &tmp.path().join("c")).unwrap();
    let bytes = std::fs::read(&files[0]).unwrap();
    let header = b"P5\n16 16\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    let body = &bytes[header.len()..];
    assert_eq!(body.len(), 2 * 256);
    assert!(body.chunks(2).all(|c| c == body[..2].as_ref()));
    let range = std::fs::read_to_string(&files[1]).unwrap();
    assert_eq!(range, "min = 2.5e0\nmax = 2.5e0\n");
}

#[test]
fn pgm_spans_the_full_grey_range() {
    let tmp = TempDir::new().unwrap();
    let files = export_grid(&noise(16), Format::Pgm, &tmp.path().join("n")).unwrap();
    let bytes = std::fs::read(&files[0]).unwrap();
    let levels: Vec<u16> = bytes[15..].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    assert_eq!(levels.iter().min(), Some(&0));
    assert_eq!(levels.iter().max(), Some(&65535));
}

#[test]
fn csv_has_one_row_per_node() {
    let tmp = TempDir::new().unwrap();
    let files = export_grid(&noise(256), Format::Csv, &tmp.path().join("r")).unwrap();
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), 256 * 256 + 1);
    assert_eq!(text.lines().next(), Some("x, y, value"));
}

#[test]
fn export_errors_carry_the_path() {
    let tmp = TempDir::new().unwrap();
    let stem = tmp.path().join("missing/dir/f");
    let err = export_grid(&noise(8), Format::Csv, &stem).unwrap_err();
    assert!(err.to_string().contains("missing/dir"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn numerical_errors_map_to_exit_two() {
    let e: CliError = PatError::Overflow {
        log_magnitude: 800.0,
        bound: 1e300,
    }
    .into();
    assert_eq!((e.exit_code(), e.kind()), (2, "overflow"));
    let e: CliError = PatError::BelowRequiredD { d: 1.0, required: 2.0 }.into();
    assert_eq!(e.exit_code(), 1);
}
