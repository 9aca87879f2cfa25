// Placeholder; replaced by the acceptance suite once library modules are in.
int main() { return 1; }
