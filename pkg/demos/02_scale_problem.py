"""
Why channels are normalized before line fitting
===============================================

Pixels along a colour edge lie on a straight line in RGB once the response
is undone. Scoring candidate responses by line-fit error alone is biased:
strong exponents shrink every value toward zero, and the error shrinks with
them. Rescaling each channel to [0, 1] first removes that bias.
"""

import tempfile
from pathlib import Path

import numpy as np

from radiocal import GgcmParams, SelectionThresholds, collect_patches, extract_distributions
from radiocal import linearisation_profile, load_image, save_image
from radiocal.synth import clean_scene

# Render a clean gamma-0.4 scene and read it back as an ordinary 8-bit image.
img, _ = clean_scene(GgcmParams.gamma(0.4))
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "scene.png"
    save_image(path, img, bits=8)
    img8 = load_image(path)

patch = collect_patches(img8, SelectionThresholds())[0]
line = extract_distributions(patch)[10]

gammas = np.round(np.arange(1, 51) * 0.02, 2)
raw = linearisation_profile(line, gammas, normalize=False)
norm = linearisation_profile(line, gammas, normalize=True)

print(" gamma   raw error      normalized")
for g, r, n in zip(gammas[::5], raw[::5], norm[::5]):
    print(f"  {g:.2f}   {r:.3e}    {n:.3e}")
print("raw minimum at", gammas[np.argmin(raw)], "| normalized minimum at", gammas[np.argmin(norm)])
