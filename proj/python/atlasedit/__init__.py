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


"""Layered-atlas video editing toolkit."""

import os
import sys

from ._atlasedit import (
    DomainError,
    Error,
    InvalidArgument,
    NotFound,
    ProviderError,
    clip_score,
    decompose,
    edit,
    evaluate,
    haarpsi,
    load_atlas,
    lpips,
    psnr,
    reconstruct,
)

__all__ = [
    "DomainError",
    "Error",
    "InvalidArgument",
    "NotFound",
    "ProviderError",
    "clip_score",
    "decompose",
    "edit",
    "evaluate",
    "haarpsi",
    "load_atlas",
    "lpips",
    "psnr",
    "reconstruct",
]
__version__ = "0.1.0"


def main():
    """Runs the bundled atlasedit command-line tool."""
    exe = os.path.join(os.path.dirname(__file__), "bin", "atlasedit")
    os.execv(exe, [exe, *sys.argv[1:]])
