from django.apps import AppConfig


class MixturesConfig(AppConfig):
    name = 'mixtures'
