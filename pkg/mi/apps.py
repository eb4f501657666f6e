from django.apps import AppConfig


class MiConfig(AppConfig):
    name = 'mi'
