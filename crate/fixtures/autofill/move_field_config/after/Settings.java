public class Settings {
    int timeout = 30;
}
