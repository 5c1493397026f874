"""
Accumulating evidence across flashes
====================================

After every flash the Bayesian accumulator multiplies each character's
posterior by the target likelihood if the character was flashed and by the
non-target likelihood if it was not, so *every* flash moves *every*
character.  The counting baseline only credits flashed characters when a
target is detected, and throws the graded confidence away.

This script replays one spelled character and prints both posteriors side by
side.
"""

from p300bci import (
    OM,
    SimConfig,
    TARGET,
    bandpass_filter,
    epoch,
    estimate_prototype,
    extended_covariance,
    fit_mdm,
    generate_session,
    init_accumulator,
    asap_update,
    om_update,
    mdm_predict,
    pmdm_log_likelihoods,
    decide,
)

# %% Calibrate on a few characters, then replay a fresh one
config = SimConfig(L=36, C=8, n_repetitions=4, erp_amplitude=0.7, noise_scale=1.0, seed=11)
target_char = 17
session = generate_session(config, targets=[3, 30, 8, 25, 12, 33, target_char])

filtered = bandpass_filter(session.recording, 1.0, 20.0)
train_events = [ev for ev in session.events if ev.episode < 6]
test_events = [ev for ev in session.events if ev.episode == 6]

train_trials = epoch(filtered, train_events, session.epoch_seconds)
prototype = estimate_prototype([t for t in train_trials if t.label == TARGET])
features = [extended_covariance(t, prototype) for t in train_trials]
model = fit_mdm(features, [t.label for t in train_trials])
print(f"calibrated on {len(train_trials)} trials; spelling character {target_char}\n")

# %% Flash-by-flash replay
asap_state = init_accumulator(session.L)
om_state = init_accumulator(session.L, mode=OM)

header = f"{'flash':>5} {'flashed?':>8} | {'soft p(target)':>14} {'rank':>4} | {'count p(target)':>15} {'rank':>4}"
print(header)
print("-" * len(header))
for trial in epoch(filtered, test_events, session.epoch_seconds):
    feature = extended_covariance(trial, prototype)
    llh_t, llh_nt = pmdm_log_likelihoods(model, feature)
    asap_state = asap_update(asap_state, llh_t, llh_nt, trial.event.flashed)
    om_state = om_update(om_state, mdm_predict(model, feature), trial.event.flashed)

    asap_probs = asap_state.probabilities()
    om_probs = om_state.probabilities()
    asap_rank = int((asap_probs > asap_probs[target_char]).sum()) + 1
    om_rank = int((om_probs > om_probs[target_char]).sum()) + 1
    mark = "yes" if trial.event.is_target else ""
    print(
        f"{asap_state.t:>5} {mark:>8} | {asap_probs[target_char]:>14.4f} {asap_rank:>4} "
        f"| {om_probs[target_char]:>15.4f} {om_rank:>4}"
    )

# %% Decisions
for name, state in (("Bayesian accumulation", asap_state), ("occurrence counting", om_state)):
    char, prob = decide(state)
    verdict = "correct" if char == target_char else "wrong"
    print(f"\n{name}: character {char} (p = {prob:.4f}) -> {verdict}")
