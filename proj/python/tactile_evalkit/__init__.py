# Copyright 2026 The tactile-evalkit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""In-process access to the evalkit metrics and leakage audit.

Arrays must be C-contiguous float32 or float64 with shape (n, d). float64
input is rounded to float32 first, so results match the command line tool run
on the same data stored as TEMB. Each function returns the report envelope
as a dict.
"""

import json

from . import _evalkit
from ._evalkit import EvalkitError, set_max_threads

__all__ = [
    "EvalkitError",
    "audit",
    "citmmd",
    "dtmmd",
    "embedding_mmd",
    "itmmd",
    "set_max_threads",
    "tmmd",
]


def tmmd(generated, reference, sigma=None):
    return json.loads(_evalkit.tmmd(generated, reference, sigma))


def embedding_mmd(generated, reference, sigma=None):
    return json.loads(_evalkit.embedding_mmd(generated, reference, sigma))


def _reference_free(which, generated, labels, ids, sigma, seed, repeats,
                    split_mode):
    return json.loads(_evalkit.reference_free(
        generated, which, labels=labels, ids=ids, sigma=sigma, seed=seed,
        repeats=repeats, split_mode=split_mode))


def itmmd(generated, ids=None, sigma=None, seed=0, repeats=5,
          split_mode="random"):
    return _reference_free("itmmd", generated, None, ids, sigma, seed,
                           repeats, split_mode)


def citmmd(generated, labels, ids=None, sigma=None, seed=0, repeats=5,
           split_mode="random"):
    return _reference_free("citmmd", generated, list(labels), ids, sigma,
                           seed, repeats, split_mode)


def dtmmd(generated, labels, ids=None, sigma=None, seed=0, repeats=5,
          split_mode="random"):
    return _reference_free("dtmmd", generated, list(labels), ids, sigma,
                           seed, repeats, split_mode)


def audit(meta, embeddings=None, ids=None, tau=0.95):
    """Audits split tags in `meta`, a list of metadata dicts.

    Embedding rows follow the order of `meta` unless `ids` names them.
    """
    text = "".join(json.dumps(row) + "\n" for row in meta)
    return json.loads(_evalkit.audit(text, embeddings, ids, tau))
