# # Noise stimuli with controllable complexity
#
# A random Fourier spectrum multiplied by a Gaussian envelope gives an image
# whose detail is set by one number, the envelope width. Small widths keep
# only coarse blobs; large widths approach white noise.

import sys
from pathlib import Path

import numpy as np

from pareidolia._io import write_image
from pareidolia.stimuli import NoiseSpec, gen_noise, quantize, radial_spectrum, spectral_centroid

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output") / "noise"
out.mkdir(parents=True, exist_ok=True)

# One image per width, all from the same seed so only the envelope differs.

for width in (1, 4, 16, 64):
    img = gen_noise(NoiseSpec(256, width, seed=7))
    write_image(out / f"noise_w{width}.pgm", quantize(img))
    spec = radial_spectrum(img, 128)
    print(f"width {width:>3}: spectral centroid {spectral_centroid(spec):6.2f} cycles/image")

# The radial power should fall off as exp(-f^2 / width^2). Averaging a few
# seeds and regressing log power on -f^2 / width^2 gives a slope near one.

width = 8.0
powers = np.mean([radial_spectrum(gen_noise(NoiseSpec(256, width, s)), 128).powers for s in range(10)], axis=0)
freqs = radial_spectrum(gen_noise(NoiseSpec(256, width, 0)), 128).freqs
sel = freqs <= 3 * width
slope = np.polyfit(-freqs[sel] ** 2 / width**2, np.log(powers[sel]), 1)[0]
print(f"envelope slope at width {width:g}: {slope:.3f}")
print(f"images written to {out}")
