use serde::Serialize;

/// Relative ledger tolerance against battery energy out.
pub const LEDGER_TOLERANCE: f64 = 0.005;
/// Absolute floor, kWh, for runs that barely draw on the battery.
pub const LEDGER_ABS_TOLERANCE: f64 = 1e-6;

/// Where the battery's energy went over a run. All terms in kWh.
///
/// Battery terms are chemical energy (`Vn * J * dt`), so the resistive loss
/// inside the pack appears as its own entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub battery_out: f64,
    pub battery_regen_in: f64,
    pub kinetic_delta: f64,
    pub rolling_loss: f64,
    pub aero_loss: f64,
    pub friction_brake_loss: f64,
    pub drivetrain_loss: f64,
    pub resistive_internal_loss: f64,
    pub residual: f64,
}

impl EnergyLedger {
    /// Battery net out minus every accounted sink.
    pub fn balance(&self) -> f64 {
        self.battery_out
            - self.battery_regen_in
            - (self.kinetic_delta
                + self.rolling_loss
                + self.aero_loss
                + self.friction_brake_loss
                + self.drivetrain_loss
                + self.resistive_internal_loss)
    }

    pub(crate) fn refresh(&mut self) {
        self.residual = self.balance();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerCheck {
    pub pass: bool,
    /// kWh
    pub residual: f64,
    /// |residual| / battery_out; zero for an empty ledger.
    pub residual_fraction: f64,
}

/// Pass iff the recomputed residual is within 0.5 % of battery energy out
/// (or 1e-6 kWh when almost nothing left the battery).
pub fn ledger_check(ledger: &EnergyLedger) -> LedgerCheck {
    let residual = ledger.balance();
    let bound = (LEDGER_TOLERANCE * ledger.battery_out).max(LEDGER_ABS_TOLERANCE);
    let residual_fraction = if ledger.battery_out > 0.0 {
        residual.abs() / ledger.battery_out
    } else if residual == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    LedgerCheck {
        pass: residual.abs() <= bound,
        residual,
        residual_fraction,
    }
}
