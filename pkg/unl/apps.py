from django.apps import AppConfig


class UnlConfig(AppConfig):
    name = 'unl'
