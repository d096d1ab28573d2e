// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Payout arithmetic for forfeited bonds and juror bond settlement.
//!
//! A forfeited bond `β` splits into a platform share, a jury pool divided
//! among the voting jurors, and a winner share. The platform share and the
//! jury pool are floored; the winner takes the residual, including every
//! unit of rounding dust, so the three parts always sum to `β` exactly.

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::ids::ParticipantId;
use crate::jury::RatingAverage;
use crate::money::{Fraction, Money};

/// Reference bond `β₀` for log scaling: one whole currency unit.
pub const LOG_SCALE_REFERENCE: Money = Money::new(100);

/// How the jury pool grows with the size of the forfeited bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum JurorFeeCurve {
    /// Pool is `floor(jury_pool_fraction * β)`.
    Flat,
    /// Pool grows with `log2(1 + β/β₀)`, `base` minor units per doubling,
    /// capped at the flat pool.
    LogScale { base: u64 },
}

/// Publicly disclosed split of a forfeited bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoutPolicy {
    pub platform_fraction: Fraction,
    pub jury_pool_fraction: Fraction,
    #[serde(default = "default_curve")]
    pub juror_fee_curve: JurorFeeCurve,
    /// Juror bond as a fraction of `β`.
    #[serde(default = "default_gamma")]
    pub gamma: Fraction,
}

fn default_curve() -> JurorFeeCurve {
    JurorFeeCurve::Flat
}

fn default_gamma() -> Fraction {
    Fraction::new(1, 10).unwrap()
}

impl Default for PayoutPolicy {
    fn default() -> Self {
        PayoutPolicy {
            platform_fraction: Fraction::new(1, 10).unwrap(),
            jury_pool_fraction: Fraction::new(3, 10).unwrap(),
            juror_fee_curve: JurorFeeCurve::Flat,
            gamma: default_gamma(),
        }
    }
}

impl PayoutPolicy {
    pub fn new(
        platform_fraction: Fraction,
        jury_pool_fraction: Fraction,
        juror_fee_curve: JurorFeeCurve,
    ) -> Result<Self, ProtocolError> {
        let policy = PayoutPolicy {
            platform_fraction,
            jury_pool_fraction,
            juror_fee_curve,
            gamma: default_gamma(),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_gamma(mut self, gamma: Fraction) -> Result<Self, ProtocolError> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let total = self
            .platform_fraction
            .checked_add(self.jury_pool_fraction)
            .ok_or(ProtocolError::Overflow)?;
        if total >= Fraction::ONE {
            return Err(ProtocolError::FractionsTooLarge(total.to_string()));
        }
        check_gamma(self.gamma)?;
        Ok(())
    }

    /// `1 - platform - jury`, strictly positive for a valid policy.
    pub fn winner_fraction(&self) -> Option<Fraction> {
        self.platform_fraction
            .checked_add(self.jury_pool_fraction)
            .and_then(Fraction::complement)
    }

    /// Total jury pool carved out of a forfeited bond `beta`.
    pub fn jury_pool(&self, beta: Money) -> Money {
        let flat = beta.mul_floor(self.jury_pool_fraction);
        match self.juror_fee_curve {
            JurorFeeCurve::Flat => flat,
            JurorFeeCurve::LogScale { base } => log_scaled_pool(beta, base).min(flat),
        }
    }
}

/// `floor(base * L(1 + β/β₀))` where `L` interpolates `log2` linearly
/// between powers of two. `L` agrees with `log2` at every power of two and
/// is concave and non-decreasing, so the pool is too (up to flooring).
fn log_scaled_pool(beta: Money, base: u64) -> Money {
    let reference = LOG_SCALE_REFERENCE.minor_units() as u128;
    let m = reference + beta.minor_units() as u128;
    // largest k with reference * 2^k <= m
    let k = (m / reference).ilog2();
    let segment = reference << k;
    let base = base as u128;
    let whole = base * k as u128;
    let frac = match base.checked_mul(m - segment) {
        Some(v) => v / segment,
        None => return Money::new(u64::MAX),
    };
    Money::new(u64::try_from(whole + frac).unwrap_or(u64::MAX))
}

/// Where a forfeited bond goes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payout {
    pub winner_share: Money,
    pub juror_shares: Vec<(ParticipantId, Money)>,
    pub platform_share: Money,
}

impl Payout {
    pub fn total(&self) -> Result<Money, ProtocolError> {
        let jurors: Result<Money, _> = self.juror_shares.iter().map(|(_, m)| m).sum();
        self.winner_share.checked_add(jurors?)?.checked_add(self.platform_share)
    }
}

/// Splits a forfeited bond between the winner, the jurors and the platform.
pub fn distribute_forfeited_bond(
    beta: Money,
    policy: &PayoutPolicy,
    jurors: &[ParticipantId],
) -> Result<Payout, ProtocolError> {
    if jurors.is_empty() {
        return Err(ProtocolError::NoJurors);
    }
    if jurors.len().is_multiple_of(2) {
        return Err(ProtocolError::EvenJury(jurors.len()));
    }
    if beta.is_zero() {
        return Err(ProtocolError::ZeroBond);
    }
    policy.validate()?;

    let platform_share = beta.mul_floor(policy.platform_fraction);
    let (per_juror, _dust) = policy.jury_pool(beta).split_even(jurors.len() as u64);
    let juror_shares: Vec<_> = jurors.iter().map(|j| (j.clone(), per_juror)).collect();
    let juror_total = Money::new(per_juror.minor_units() * jurors.len() as u64);
    let winner_share = beta.checked_sub(platform_share)?.checked_sub(juror_total)?;

    Ok(Payout {
        winner_share,
        juror_shares,
        platform_share,
    })
}

fn check_gamma(gamma: Fraction) -> Result<(), ProtocolError> {
    if gamma == Fraction::ZERO || gamma >= Fraction::ONE {
        return Err(ProtocolError::FractionOutOfRange(gamma.to_string()));
    }
    Ok(())
}

/// Refundable deposit a seated juror posts: `floor(γ·β)`.
pub fn juror_bond_amount(beta: Money, gamma: Fraction) -> Result<Money, ProtocolError> {
    check_gamma(gamma)?;
    Ok(beta.mul_floor(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondStatus {
    Held,
    Refunded,
    ForfeitedToReserve,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JurorBond {
    pub juror_id: ParticipantId,
    pub amount: Money,
    pub status: BondStatus,
}

impl JurorBond {
    pub fn post(juror_id: ParticipantId, beta: Money, gamma: Fraction) -> Result<Self, ProtocolError> {
        Ok(JurorBond {
            juror_id,
            amount: juror_bond_amount(beta, gamma)?,
            status: BondStatus::Held,
        })
    }
}

/// Refunds a held juror bond when the juror attended, submitted an
/// assessment and was rated at least neutral on average; otherwise the bond
/// goes to the reserve fund.
pub fn settle_juror_bond(
    bond: &JurorBond,
    attended: bool,
    assessment_submitted: bool,
    avg_rating: impl Into<RatingAverage>,
) -> Result<JurorBond, ProtocolError> {
    if bond.status != BondStatus::Held {
        return Err(ProtocolError::AlreadySettled);
    }
    let good_standing = avg_rating.into().at_or_above_neutral();
    let status = if attended && assessment_submitted && good_standing {
        BondStatus::Refunded
    } else {
        BondStatus::ForfeitedToReserve
    };
    Ok(JurorBond { status, ..bond.clone() })
}
