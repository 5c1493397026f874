"""
From raw signal to extended covariance features
===============================================

One feature per flash: band-pass the recording, cut a one-second epoch at the
flash onset, stack the average target response (the prototype) on top of the
epoch, and take the covariance of the stack.  The off-diagonal block then
measures how much the epoch looks like the prototype, which is exactly the
discriminative information for oddball responses.
"""

import numpy as np

from p300bci import (
    SimConfig,
    TARGET,
    bandpass_filter,
    epoch,
    estimate_prototype,
    extended_covariance,
    generate_session,
)

# %% A small synthetic session
config = SimConfig(L=36, C=4, n_repetitions=3, erp_amplitude=1.0, noise_scale=1.0, seed=3)
session = generate_session(config, targets=[7, 21, 0, 14])
print(f"{session.recording.n_channels} channels, "
      f"{session.recording.n_samples / config.fs:.1f} s, {len(session.events)} flashes")

# %% Preprocess and epoch
filtered = bandpass_filter(session.recording, 1.0, 20.0)
trials = epoch(filtered, session.events, session.epoch_seconds)
target_trials = [t for t in trials if t.label == TARGET]
print(f"{len(trials)} trials, {len(target_trials)} targets "
      f"({len(target_trials) / len(trials):.0%} of flashes)")

# %% The prototype is the grand average of target epochs
prototype = estimate_prototype(target_trials)
peak_sample = int(np.argmax(prototype[-1]))
print(f"prototype peaks {peak_sample / config.fs * 1000:.0f} ms after flash onset "
      "(posterior channel)")

# %% Extended covariance block structure
features = [extended_covariance(t, prototype, shrinkage=0.01) for t in trials]
print("feature order:", features[0].shape, "(twice the channel count)")

c = config.C
cross_energy = lambda f: np.linalg.norm(f[:c, c:])  # prototype x epoch block
target_cross = np.mean([cross_energy(f) for f, t in zip(features, trials) if t.label == TARGET])
nontarget_cross = np.mean([cross_energy(f) for f, t in zip(features, trials) if t.label != TARGET])
print(f"mean |prototype-epoch block|: targets {target_cross:.3f}, "
      f"non-targets {nontarget_cross:.3f}")

# Before shrinkage, the top-left block is the prototype's own covariance,
# identical for every trial of the session:
unshrunk = [extended_covariance(t, prototype, shrinkage=0.0) for t in trials]
blocks = np.stack([f[:c, :c] for f in unshrunk])
print("prototype block spread across trials (unshrunk):", float(np.ptp(blocks, axis=0).max()))
