import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'meshkit.settings')
django.setup()
