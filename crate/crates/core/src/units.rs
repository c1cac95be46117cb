//! Energy/rate conversion. Rates are angular frequencies in ps⁻¹.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Converts an energy in meV into an angular rate in ps⁻¹.
pub fn energy_to_rate(mev: f64) -> f64 {
    mev / HBAR_MEV_PS
}

/// Inverse of [`energy_to_rate`].
pub fn rate_to_energy(rate: f64) -> f64 {
    rate * HBAR_MEV_PS
}

/// Converts μeV into ps⁻¹.
pub fn micro_ev_to_rate(uev: f64) -> f64 {
    energy_to_rate(uev * 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_maps_to_unit_rate() {
        assert!((energy_to_rate(0.658_211_956_9) - 1.0).abs() < 1e-15);
        assert_eq!(energy_to_rate(0.0), 0.0);
    }

    #[test]
    fn channel_rate_and_pulse_width() {
        let gamma = energy_to_rate(0.2);
        assert!((gamma - 0.30385).abs() < 1e-5);
        // sech width 6/gamma
        let width = 6.0 / gamma;
        assert!((width - 19.746).abs() < 1e-2);
        assert!(30.0 * width > 300.0 / 2.0);
    }

    #[test]
    fn round_trip() {
        for x in [0.1, 1.0, 3e-3, 17.5] {
            assert!((rate_to_energy(energy_to_rate(x)) - x).abs() < 1e-15);
        }
    }
}
