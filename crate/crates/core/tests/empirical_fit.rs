//! Slow end-to-end check of the empirical optimal-detuning fit for smooth
//! pulses against the published sin² fit band.

use stabsim_core::atoms::AtomDataset;
use stabsim_core::optimal::fit_delta_opt_empirical;
use stabsim_core::pulses::EnvelopeSpec;
use stabsim_core::sweep::linear_grid;

#[test]
fn sin2_fit_lands_in_the_published_band() {
    // published empirical line: 3.122 - 73.3 x; the exact grid behind it is
    // unknown, so the assertion is a band around it
    let ds = AtomDataset::builtin("He2").unwrap();
    let law = fit_delta_opt_empirical(
        &ds,
        EnvelopeSpec::pure_sin2(),
        0.1,
        &linear_grid(0.5, 5.0, 10),
        (-450.0, 50.0),
    )
    .unwrap();
    assert!(
        (-80.0..=-66.0).contains(&law.slope),
        "slope {} outside [-80, -66]",
        law.slope
    );
    assert!(
        (0.0..=6.0).contains(&law.intercept),
        "intercept {} outside [0, 6]",
        law.intercept
    );
    assert!(law.fit_residual > 0.0 && law.fit_residual < 10.0);
}
