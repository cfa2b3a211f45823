from .kernels import BACKEND
