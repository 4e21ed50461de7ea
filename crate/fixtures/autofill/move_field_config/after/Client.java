public class Client {
    private final Settings settings = new Settings();
    private final Transport transport;

    Client(Transport transport) {
        this.transport = transport;
    }

    void send(String body) {
        transport.write(body, settings.timeout);
    }

    void extend(int seconds) {
        settings.timeout = settings.timeout + seconds;
    }
}
