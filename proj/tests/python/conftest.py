# Copyright 2026 The atlasedit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import numpy as np
import pytest
from PIL import Image


def sine_image(width, height):
    y, x, c = np.meshgrid(np.arange(height), np.arange(width), np.arange(3), indexing="ij")
    return (0.5 + 0.4 * np.sin(0.3 * x + 0.2 * y + c)).astype(np.float32)


def perturbed_sine_image(width, height):
    y, x, c = np.meshgrid(np.arange(height), np.arange(width), np.arange(3), indexing="ij")
    a = 0.5 + 0.4 * np.sin(0.3 * x + 0.2 * y + c)
    return np.clip(a + 0.08 * np.cos(0.7 * x - 0.4 * y + 2 * c), 0.0, 1.0).astype(np.float32)


def write_frames(directory, frames):
    directory.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(frames):
        Image.fromarray(np.round(np.clip(f, 0, 1) * 255).astype(np.uint8)).save(directory / f"frame_{i:05d}.png")


@pytest.fixture
def constant_project(tmp_path):
    import atlasedit

    frame = np.empty((12, 16, 3), np.float32)
    frame[...] = np.array([51, 102, 153], np.float32) / 255
    write_frames(tmp_path / "frames", [frame] * 3)
    psnr = atlasedit.decompose(tmp_path / "frames", tmp_path / "project", seed=4)
    return tmp_path, psnr
